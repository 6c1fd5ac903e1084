#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace grushin {

/// Which singular end of the half-line (0, ∞) an analysis refers to.
enum class Endpoint { Zero, Infinity };

/// Half-plane (continuous y, Fourier modes ξ ∈ ℝ) or half-cylinder
/// (periodic y, Fourier modes k ∈ ℤ).
enum class Topology { Plane, Cylinder };

enum class ErrorKind {
    Domain,
    NonConvergence,
    Inconclusive,
    StepUnderflow,
    GridTooCoarse,
    TailAssumptionViolated,
    Format,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::TailAssumptionViolated: return "TailAssumptionViolated";
    case ErrorKind::Format: return "FormatError";
    }
    return "Error";
}

inline constexpr std::string_view to_string(Endpoint e) {
    return e == Endpoint::Zero ? "zero" : "infinity";
}

inline constexpr std::string_view to_string(Topology t) {
    return t == Topology::Plane ? "plane" : "cylinder";
}

/// Base of every error the library throws. The kind survives rethrows
/// that only add context (see with_context).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define GRUSHIN_DEFINE_ERROR(Name, Kind)                                        \
    class Name : public Error {                                                 \
    public:                                                                     \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    };

GRUSHIN_DEFINE_ERROR(DomainError, Domain)
GRUSHIN_DEFINE_ERROR(NonConvergence, NonConvergence)
GRUSHIN_DEFINE_ERROR(StepUnderflow, StepUnderflow)
GRUSHIN_DEFINE_ERROR(GridTooCoarse, GridTooCoarse)
GRUSHIN_DEFINE_ERROR(TailAssumptionViolated, TailAssumptionViolated)
GRUSHIN_DEFINE_ERROR(FormatError, Format)

#undef GRUSHIN_DEFINE_ERROR

/// Rethrows an error of the same dynamic kind with extra context appended.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
    const std::string msg = std::string(e.what()) + " [" + context + "]";
    switch (e.kind()) {
    case ErrorKind::Domain: throw DomainError(msg);
    case ErrorKind::NonConvergence: throw NonConvergence(msg);
    case ErrorKind::StepUnderflow: throw StepUnderflow(msg);
    case ErrorKind::GridTooCoarse: throw GridTooCoarse(msg);
    case ErrorKind::TailAssumptionViolated: throw TailAssumptionViolated(msg);
    case ErrorKind::Format: throw FormatError(msg);
    case ErrorKind::Inconclusive: break;
    }
    throw Error(e.kind(), msg);
}

inline void require_positive(double x, std::string_view what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(what) + " must be a finite positive real, got " +
                          std::to_string(x));
    }
}

}  // namespace grushin

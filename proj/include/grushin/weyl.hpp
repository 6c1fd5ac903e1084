#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "grushin/common.hpp"
#include "grushin/fiber.hpp"
#include "grushin/numerics.hpp"

namespace grushin::weyl {

enum class EndpointClass { LimitPoint, LimitCircle };
enum class Method { Symbolic, Numeric };

inline constexpr std::string_view to_string(EndpointClass c) {
    return c == EndpointClass::LimitPoint ? "limit-point" : "limit-circle";
}
inline constexpr std::string_view to_string(Method m) {
    return m == Method::Symbolic ? "symbolic" : "numeric";
}

struct SolutionEvidence {
    std::string solution;
    bool square_integrable = false;
    /// Numeric route only; absent when that solution's verdict was
    /// Inconclusive and the other solution already decided the endpoint.
    std::optional<numerics::TailFit> fit;
    bool inconclusive = false;
};

/// LimitCircle iff both solutions are square-integrable near the endpoint
/// with respect to x^{−α}dx.
struct EndpointReport {
    Endpoint endpoint;
    EndpointClass endpoint_class;
    Method method;
    std::array<SolutionEvidence, 2> evidence;
};

struct DeficiencyIndices {
    int n_plus = 0;
    int n_minus = 0;

    friend bool operator==(const DeficiencyIndices&, const DeficiencyIndices&) = default;
};

/// Exact square-integrability of x^p (ln x)^m exp(c x^γ) near an endpoint
/// against x^{−α}dx, read off its leading behaviour there.
inline bool integrable_from_asymptotics(const fiber::Asymptotics& a, double alpha, Endpoint e) {
    if (a.exp_coefficient != 0.0) {
        return a.exp_coefficient < 0.0;
    }
    // |ψ|² x^{−α} ~ x^{q−1} (ln x)^{2m}
    const double q = 2.0 * a.power - alpha + 1.0;
    return e == Endpoint::Zero ? q > 0.0 : q < 0.0;
}

/// The case table for V_{α,ξ}:
///   ξ = 0:          0 is LC iff −3 < α < 1; ∞ is LP.
///   ξ ≠ 0, α > −1:  0 is LC iff α < 1;      ∞ is LP.
///   ξ ≠ 0, α < −1:  both LP.
///   ξ ≠ 0, α = −1:  0 is LC iff |ξ| < 1;    ∞ is LP.
inline EndpointClass symbolic_class(double alpha, double xi, Endpoint e) {
    if (e == Endpoint::Infinity) {
        return EndpointClass::LimitPoint;
    }
    bool circle = false;
    if (xi == 0.0) {
        circle = alpha > -3.0 && alpha < 1.0;
    } else if (alpha > -1.0) {
        circle = alpha < 1.0;
    } else if (alpha < -1.0) {
        circle = false;
    } else {
        circle = std::abs(xi) < 1.0;
    }
    return circle ? EndpointClass::LimitCircle : EndpointClass::LimitPoint;
}

inline EndpointReport classify_endpoint_symbolic(const fiber::FiberProblem& p, Endpoint e) {
    const fiber::SolutionPair pair = fiber::closed_form_solutions(p);
    EndpointReport r{e, symbolic_class(p.alpha(), p.mode(), e), Method::Symbolic, {}};
    const std::size_t idx = e == Endpoint::Zero ? 0 : 1;
    for (std::size_t s = 0; s < 2; ++s) {
        r.evidence[s].solution = pair[s].describe();
        r.evidence[s].square_integrable =
            integrable_from_asymptotics(pair.asymptotic_exponents[s][idx], p.alpha(), e);
    }
    return r;
}

/// True when (α, ξ) lies within δ of a point where the case table switches:
/// α ∈ {−3, −1, 1}, or ξ = 0, or |ξ| = 1 at α near −1.
inline bool near_regime_boundary(const fiber::FiberProblem& p, double delta = 1e-3) {
    const double a = p.alpha();
    const double xi = std::abs(p.mode());
    for (double b : {-3.0, -1.0, 1.0}) {
        if (std::abs(a - b) < delta) return true;
    }
    if (xi > 0.0 && xi < delta) return true;
    if (std::abs(a + 1.0) < delta && std::abs(xi - 1.0) < delta) return true;
    return false;
}

/// Numerical route: both closed-form solutions are tested for
/// square-integrability against x^{−α}dx on a cutoff ladder. Throws
/// InconclusiveError only when no solution is definitively non-integrable
/// and at least one verdict is inconclusive.
inline EndpointReport classify_endpoint_numeric(const fiber::FiberProblem& p, Endpoint e,
                                                const numerics::CutoffLadder& ladder,
                                                const numerics::IntegrabilityOptions& opt = {}) {
    const fiber::SolutionPair pair = fiber::closed_form_solutions(p);
    EndpointReport r{e, EndpointClass::LimitPoint, Method::Numeric, {}};
    bool any_divergent = false;
    bool any_inconclusive = false;
    std::optional<numerics::InconclusiveError> pending;
    for (std::size_t s = 0; s < 2; ++s) {
        const fiber::ClosedForm& f = pair[s];
        r.evidence[s].solution = f.describe();
        try {
            auto res = numerics::integrability_verdict_log([&f](double x) { return f.log_abs(x); },
                                                           -p.alpha(), e, ladder, opt);
            r.evidence[s].square_integrable = res.finite;
            r.evidence[s].fit = std::move(res.fit);
            any_divergent = any_divergent || !res.finite;
        } catch (const numerics::InconclusiveError& err) {
            r.evidence[s].inconclusive = true;
            r.evidence[s].fit = err.fit();
            any_inconclusive = true;
            if (!pending) pending.emplace(err);
        }
    }
    if (any_divergent) {
        r.endpoint_class = EndpointClass::LimitPoint;
        return r;
    }
    if (any_inconclusive) {
        throw numerics::InconclusiveError(
            std::string("endpoint ") + std::string(to_string(e)) + " at alpha=" + std::to_string(p.alpha()) +
                ", mode=" + std::to_string(p.mode()) + ": " + pending->what(),
            pending->fit());
    }
    r.endpoint_class = EndpointClass::LimitCircle;
    return r;
}

inline EndpointReport classify_endpoint_numeric(const fiber::FiberProblem& p, Endpoint e) {
    return classify_endpoint_numeric(p, e, numerics::CutoffLadder::deep(e));
}

/// Weyl alternative for a two-endpoint problem: n± = number of
/// limit-circle endpoints. Equal because the operator is real.
inline DeficiencyIndices deficiency_indices(const fiber::FiberProblem& p) {
    int n = 0;
    for (Endpoint e : {Endpoint::Zero, Endpoint::Infinity}) {
        if (symbolic_class(p.alpha(), p.mode(), e) == EndpointClass::LimitCircle) ++n;
    }
    return {n, n};
}

/// Essentially self-adjoint iff both endpoints are limit-point.
inline bool fiber_esa(const fiber::FiberProblem& p) {
    return deficiency_indices(p) == DeficiencyIndices{0, 0};
}

}  // namespace grushin::weyl

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "grushin/common.hpp"
#include "grushin/fiber.hpp"
#include "grushin/weyl.hpp"

namespace grushin::aggregate {

enum class ModeSetKind {
    Empty,
    AllRealModes,
    OpenInterval,
    SingletonRealZero,
    AllIntegerModes,
    SingletonIntegerZero,
};

/// Set of Fourier modes whose fiber operator is not essentially
/// self-adjoint. Plane sets are measured with Lebesgue measure on ℝ,
/// cylinder sets with counting measure on ℤ.
struct ModeSet {
    ModeSetKind kind = ModeSetKind::Empty;
    double lo = 0.0;
    double hi = 0.0;

    static ModeSet empty() { return {}; }
    static ModeSet open_interval(double lo, double hi) { return {ModeSetKind::OpenInterval, lo, hi}; }
    static ModeSet of(ModeSetKind k) { return {k, 0.0, 0.0}; }

    /// Lebesgue-null: only meaningful for plane sets.
    bool measure_is_zero() const {
        return kind == ModeSetKind::Empty || kind == ModeSetKind::SingletonRealZero;
    }

    bool contains(double mode) const {
        switch (kind) {
        case ModeSetKind::Empty: return false;
        case ModeSetKind::AllRealModes: return true;
        case ModeSetKind::OpenInterval: return mode > lo && mode < hi;
        case ModeSetKind::SingletonRealZero: return mode == 0.0;
        case ModeSetKind::AllIntegerModes: return std::trunc(mode) == mode;
        case ModeSetKind::SingletonIntegerZero: return mode == 0.0;
        }
        return false;
    }

    std::string label() const {
        switch (kind) {
        case ModeSetKind::Empty: return "empty";
        case ModeSetKind::AllRealModes: return "all-real-modes";
        case ModeSetKind::OpenInterval: {
            auto fmt = [](double v) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                return std::string(buf);
            };
            return "open-interval(" + fmt(lo) + "," + fmt(hi) + ")";
        }
        case ModeSetKind::SingletonRealZero: return "singleton-real-zero";
        case ModeSetKind::AllIntegerModes: return "all-integer-modes";
        case ModeSetKind::SingletonIntegerZero: return "singleton-integer-zero";
        }
        return "?";
    }

    friend bool operator==(const ModeSet&, const ModeSet&) = default;
};

/// Σ_k n₊(Ã_α(k)) for the cylinder; infinite when infinitely many modes fail.
struct TotalDeficiency {
    bool infinite = false;
    unsigned long count = 0;

    std::string label() const { return infinite ? "infinite" : std::to_string(count); }
    friend bool operator==(const TotalDeficiency&, const TotalDeficiency&) = default;
};

struct Verdict {
    double alpha = 0.0;
    Topology topology = Topology::Plane;
    bool essentially_self_adjoint = false;
    ModeSet failing_modes;
    /// Cylinder only.
    std::optional<TotalDeficiency> total_deficiency;
    std::string regime_label;
};

struct AtlasRow {
    double alpha;
    Verdict plane;
    Verdict cylinder;
};

inline std::string classify_regime(double alpha, Topology t) {
    if (t == Topology::Plane) {
        if (alpha < -1.0) {
            return alpha > -3.0 ? "esa-negative / measure-zero-exception" : "esa-negative";
        }
        if (alpha == -1.0) return "boundary-minus-one";
        if (alpha < 1.0) return "all-modes-fail";
        return "esa-positive";
    }
    if (alpha <= -3.0) return "esa";
    if (alpha <= -1.0) return "zero-mode-fails";
    if (alpha < 1.0) return "all-modes-fail";
    return "esa";
}

/// The a.e. rule on the half-plane: A_α is essentially self-adjoint iff
/// the set of failing fibers is Lebesgue-null.
///
/// Fiber verdicts depend on ξ only through ξ² and change only at ξ = 0 and
/// |ξ| = 1, so one probe per cell {0}, (0,1), {1}, (1,∞) determines the set.
inline Verdict plane_verdict(double alpha) {
    if (!std::isfinite(alpha)) {
        throw DomainError("plane_verdict: alpha must be finite");
    }
    auto fails = [alpha](double xi) {
        return !weyl::fiber_esa(fiber::FiberProblem::plane(alpha, xi)) ||
               !weyl::fiber_esa(fiber::FiberProblem::plane(alpha, -xi));
    };
    const bool at_zero = fails(0.0);
    const bool inside = fails(0.5);
    const bool at_one = fails(1.0);
    const bool outside = fails(2.0);

    ModeSet failing;
    if (!at_zero && !inside && !at_one && !outside) {
        failing = ModeSet::empty();
    } else if (at_zero && inside && at_one && outside) {
        failing = ModeSet::of(ModeSetKind::AllRealModes);
    } else if (at_zero && inside && !at_one && !outside) {
        failing = ModeSet::open_interval(-1.0, 1.0);
    } else if (at_zero && !inside && !at_one && !outside) {
        failing = ModeSet::of(ModeSetKind::SingletonRealZero);
    } else {
        throw std::logic_error("plane_verdict: fiber pattern has no ModeSet representation");
    }
    Verdict v;
    v.alpha = alpha;
    v.topology = Topology::Plane;
    v.failing_modes = failing;
    v.essentially_self_adjoint = failing.measure_is_zero();
    v.regime_label = classify_regime(alpha, Topology::Plane);
    return v;
}

struct CylinderOptions {
    long k_max = 64;
};

/// Deficiency-index summation over integer modes on the half-cylinder.
/// Modes |k| ≤ k_max are evaluated; the verdict for |k| > k_max is taken
/// from the window border after checking it is constant on [k_max/2, k_max].
inline Verdict cylinder_verdict(double alpha, const CylinderOptions& opt = {}) {
    if (!std::isfinite(alpha)) {
        throw DomainError("cylinder_verdict: alpha must be finite");
    }
    if (opt.k_max < 2) {
        throw DomainError("cylinder_verdict: k_max must be at least 2");
    }
    const long K = opt.k_max;
    std::map<long, int> n;
    for (long k = -K; k <= K; ++k) {
        n[k] = weyl::deficiency_indices(fiber::FiberProblem::cylinder(alpha, k)).n_plus;
    }
    const int tail = n[K];
    for (long k = K / 2; k <= K; ++k) {
        if (n[k] != tail || n[-k] != tail) {
            throw TailAssumptionViolated("cylinder_verdict: per-mode deficiency not constant on |k| in [" +
                                         std::to_string(K / 2) + ", " + std::to_string(K) +
                                         "] at alpha=" + std::to_string(alpha));
        }
    }

    Verdict v;
    v.alpha = alpha;
    v.topology = Topology::Cylinder;
    v.regime_label = classify_regime(alpha, Topology::Cylinder);
    if (tail > 0) {
        for (const auto& [k, nk] : n) {
            if (nk == 0) {
                throw std::logic_error("cylinder_verdict: failing tail with passing mode k=" + std::to_string(k));
            }
        }
        v.failing_modes = ModeSet::of(ModeSetKind::AllIntegerModes);
        v.total_deficiency = TotalDeficiency{true, 0};
    } else {
        unsigned long total = 0;
        bool others = false;
        for (const auto& [k, nk] : n) {
            total += static_cast<unsigned long>(nk);
            if (k != 0 && nk > 0) others = true;
        }
        if (others) {
            throw std::logic_error("cylinder_verdict: finitely many nonzero modes fail; no ModeSet representation");
        }
        v.failing_modes = total == 0 ? ModeSet::empty() : ModeSet::of(ModeSetKind::SingletonIntegerZero);
        v.total_deficiency = TotalDeficiency{false, total};
    }
    v.essentially_self_adjoint = v.total_deficiency == TotalDeficiency{false, 0};
    return v;
}

/// One row per α, both topologies. Rows are independent and may be
/// computed on `jobs` threads; the output order is the input order.
inline std::vector<AtlasRow> regime_atlas(std::span<const double> alphas, unsigned jobs = 1,
                                          const CylinderOptions& opt = {}) {
    for (double a : alphas) {
        if (!std::isfinite(a)) {
            throw DomainError("regime_atlas: alphas must be finite");
        }
    }
    const std::size_t n = alphas.size();
    std::vector<std::optional<AtlasRow>> rows(n);
    std::vector<std::exception_ptr> errors(n);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < n; i += stride) {
            try {
                rows[i] = AtlasRow{alphas[i], plane_verdict(alphas[i]), cylinder_verdict(alphas[i], opt)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work, w, workers);
        }
        for (auto& t : pool) t.join();
    }
    std::vector<AtlasRow> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) {
            const std::string ctx = "atlas row alpha=" + std::to_string(alphas[i]);
            try {
                std::rethrow_exception(errors[i]);
            } catch (const Error& e) {
                rethrow_with_context(e, ctx);
            } catch (const std::exception& e) {
                throw std::runtime_error(std::string(e.what()) + " [" + ctx + "]");
            }
        }
        out.push_back(std::move(*rows[i]));
    }
    return out;
}

/// lo, lo+step, ..., up to hi (inclusive within 1e-9·step).
inline std::vector<double> alpha_range(double lo, double hi, double step) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0) || !std::isfinite(step)) {
        throw DomainError("alpha_range: bounds must be finite and step > 0");
    }
    if (lo > hi) {
        throw DomainError("alpha_range: empty range (min > max)");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + step * static_cast<double>(i);
    }
    return out;
}

}  // namespace grushin::aggregate

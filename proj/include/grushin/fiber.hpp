#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "grushin/common.hpp"
#include "grushin/finite_difference.hpp"

namespace grushin::fiber {

/// Unweighted: ψ'' + V_{α,ξ}ψ on L²(dx).
/// Weighted:   ψ'' − ξ²x^{2α}ψ − (α/x)ψ' on L²(x^{−α}dx).
/// The two are conjugate under multiplication by x^{∓α/2}.
enum class Form { Unweighted, Weighted };

/// One fiber operator A_α(ξ) (plane) or Ã_α(k) (cylinder).
class FiberProblem {
public:
    FiberProblem(double alpha, double mode, Topology topology, Form form = Form::Weighted)
        : alpha_(alpha), mode_(mode), topology_(topology), form_(form) {
        if (!std::isfinite(alpha_) || !std::isfinite(mode_)) {
            throw DomainError("FiberProblem: alpha and mode must be finite");
        }
        if (topology_ == Topology::Cylinder && std::trunc(mode_) != mode_) {
            throw DomainError("FiberProblem: cylinder modes are integers, got " + std::to_string(mode_));
        }
    }

    static FiberProblem plane(double alpha, double xi, Form form = Form::Weighted) {
        return {alpha, xi, Topology::Plane, form};
    }
    static FiberProblem cylinder(double alpha, long k, Form form = Form::Weighted) {
        return {alpha, static_cast<double>(k), Topology::Cylinder, form};
    }

    double alpha() const noexcept { return alpha_; }
    /// ξ for the plane, k for the cylinder; both enter the operator as ξ².
    double mode() const noexcept { return mode_; }
    Topology topology() const noexcept { return topology_; }
    Form form() const noexcept { return form_; }

    FiberProblem with_form(Form form) const { return {alpha_, mode_, topology_, form}; }

private:
    double alpha_;
    double mode_;
    Topology topology_;
    Form form_;
};

namespace detail {

#ifdef GRUSHIN_FAULT_INJECTION
// Negative-control builds only: corrupts the centrifugal constant.
inline constexpr double kCentrifugalDenominator = 4.4;
#else
inline constexpr double kCentrifugalDenominator = 4.0;
#endif

inline double potential_value(double alpha, double xi, double x) {
    return -xi * xi * std::pow(x, 2.0 * alpha) - alpha * (2.0 + alpha) / (kCentrifugalDenominator * x * x);
}

inline std::string fmt_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// V_{α,ξ}(x) = −ξ²x^{2α} − α(2+α)/(4x²).
inline double potential(const FiberProblem& p, double x) {
    if (p.form() != Form::Unweighted) {
        throw DomainError("potential: defined for the unweighted form only");
    }
    require_positive(x, "potential: x");
    return detail::potential_value(p.alpha(), p.mode(), x);
}

// ---------------------------------------------------------------------------
// Closed-form fundamental solutions
// ---------------------------------------------------------------------------

/// ψ(x) = x^power · (ln x)^{logarithmic} · exp(exp_coefficient · x^exp_power).
struct ClosedForm {
    double power = 0.0;
    bool logarithmic = false;
    double exp_coefficient = 0.0;
    double exp_power = 0.0;

    /// ψ, ψ', ψ'' divided by the exponential factor, so that the ratios
    /// between them stay representable for any x.
    struct Scaled {
        double value;
        double first;
        double second;
    };

    Scaled scaled(double x) const {
        const double u = std::pow(x, power);
        const double du = power * std::pow(x, power - 1.0);
        const double d2u = power * (power - 1.0) * std::pow(x, power - 2.0);
        double v = 1.0, dv = 0.0, d2v = 0.0;
        if (logarithmic) {
            v = std::log(x);
            dv = 1.0 / x;
            d2v = -1.0 / (x * x);
        }
        const double a = u * v;
        const double da = du * v + u * dv;
        const double d2a = d2u * v + 2.0 * du * dv + u * d2v;
        double g = 0.0, dg = 0.0;
        if (exp_coefficient != 0.0) {
            g = exp_coefficient * exp_power * std::pow(x, exp_power - 1.0);
            dg = exp_coefficient * exp_power * (exp_power - 1.0) * std::pow(x, exp_power - 2.0);
        }
        return {a, da + a * g, d2a + 2.0 * da * g + a * (dg + g * g)};
    }

    double exponent_at(double x) const {
        return exp_coefficient == 0.0 ? 0.0 : exp_coefficient * std::pow(x, exp_power);
    }

    double value(double x) const { return scaled(x).value * std::exp(exponent_at(x)); }

    /// (ψ, ψ', ψ'') with exact derivatives.
    std::array<double, 3> derivatives(double x) const {
        const Scaled s = scaled(x);
        const double w = std::exp(exponent_at(x));
        return {s.value * w, s.first * w, s.second * w};
    }

    double log_abs(double x) const {
        double l = power * std::log(x) + exponent_at(x);
        if (logarithmic) {
            l += std::log(std::abs(std::log(x)));
        }
        return l;
    }

    /// Multiplies by x^shift (the gauge factor between the two forms).
    ClosedForm gauged(double shift) const {
        ClosedForm g = *this;
        g.power += shift;
        return g;
    }

    std::string describe() const {
        std::string s;
        auto append = [&s](const std::string& term) { s += s.empty() ? term : "*" + term; };
        if (power != 0.0) append("x^" + detail::fmt_real(power));
        if (logarithmic) append("log(x)");
        if (exp_coefficient != 0.0) {
            append("exp(" + detail::fmt_real(exp_coefficient) + "*x^" + detail::fmt_real(exp_power) + ")");
        }
        return s.empty() ? "1" : s;
    }
};

enum class Branch { XiZeroGeneric, XiZeroAlphaMinusOne, XiNonzeroGeneric, XiNonzeroAlphaMinusOne };

inline constexpr std::string_view to_string(Branch b) {
    switch (b) {
    case Branch::XiZeroGeneric: return "xi-zero-generic";
    case Branch::XiZeroAlphaMinusOne: return "xi-zero-alpha-minus-one";
    case Branch::XiNonzeroGeneric: return "xi-nonzero-generic";
    case Branch::XiNonzeroAlphaMinusOne: return "xi-nonzero-alpha-minus-one";
    }
    return "?";
}

/// Leading behaviour of a solution at one endpoint:
/// x^power · (ln x)^{logarithmic} · exp(exp_coefficient · x^exp_power),
/// where exp_coefficient = 0 when the exponential factor tends to 1 there.
struct Asymptotics {
    double power = 0.0;
    bool logarithmic = false;
    double exp_coefficient = 0.0;
    double exp_power = 0.0;
};

inline Asymptotics asymptotics(const ClosedForm& f, Endpoint e) {
    Asymptotics a{f.power, f.logarithmic, 0.0, 0.0};
    const bool exp_matters = f.exp_coefficient != 0.0 &&
                             (e == Endpoint::Zero ? f.exp_power < 0.0 : f.exp_power > 0.0);
    if (exp_matters) {
        a.exp_coefficient = f.exp_coefficient;
        a.exp_power = f.exp_power;
    }
    return a;
}

struct SolutionPair {
    Branch branch;
    ClosedForm first;
    ClosedForm second;
    /// asymptotics[solution][endpoint], endpoint 0 = Zero, 1 = Infinity.
    std::array<std::array<Asymptotics, 2>, 2> asymptotic_exponents;

    const ClosedForm& operator[](std::size_t i) const { return i == 0 ? first : second; }
};

/// The two fundamental solutions of ψ'' − ξ²x^{2α}ψ − (α/x)ψ' = 0.
///
/// Branches split exactly on ξ = 0 and α = −1. In the exponential branch the
/// pair is ordered recessive-first: recessive at ∞ when α > −1, recessive at
/// 0 when α < −1. For α = −1, ξ ≠ 0 the first solution is x^{|ξ|}.
inline SolutionPair closed_form_solutions(const FiberProblem& p) {
    const double a = p.alpha();
    const double xi = p.mode();
    SolutionPair pair{};
    if (xi == 0.0 && a != -1.0) {
        pair.branch = Branch::XiZeroGeneric;
        pair.first = ClosedForm{};
        pair.second = ClosedForm{1.0 + a};
    } else if (xi == 0.0) {
        pair.branch = Branch::XiZeroAlphaMinusOne;
        pair.first = ClosedForm{};
        pair.second = ClosedForm{0.0, true};
    } else if (a != -1.0) {
        pair.branch = Branch::XiNonzeroGeneric;
        const double gamma = 1.0 + a;
        const double c = std::abs(xi) / std::abs(gamma);
        pair.first = ClosedForm{0.0, false, -c, gamma};
        pair.second = ClosedForm{0.0, false, c, gamma};
    } else {
        pair.branch = Branch::XiNonzeroAlphaMinusOne;
        pair.first = ClosedForm{std::abs(xi)};
        pair.second = ClosedForm{-std::abs(xi)};
    }
    for (std::size_t s = 0; s < 2; ++s) {
        pair.asymptotic_exponents[s][0] = asymptotics(pair[s], Endpoint::Zero);
        pair.asymptotic_exponents[s][1] = asymptotics(pair[s], Endpoint::Infinity);
    }
    return pair;
}

/// Max over xs and both solutions of the weighted-form residual
/// |ψ'' − ξ²x^{2α}ψ − (α/x)ψ'|, relative to the largest of the three terms.
inline double ode_residual(const SolutionPair& pair, const FiberProblem& p, std::span<const double> xs) {
    const double a = p.alpha();
    const double xi2 = p.mode() * p.mode();
    double worst = 0.0;
    for (double x : xs) {
        require_positive(x, "ode_residual: sample point");
        for (std::size_t s = 0; s < 2; ++s) {
            const auto d = pair[s].scaled(x);
            const double t1 = d.second;
            const double t2 = xi2 * std::pow(x, 2.0 * a) * d.value;
            const double t3 = (a / x) * d.first;
            const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
            if (scale > 0.0) {
                worst = std::max(worst, std::abs(t1 - t2 - t3) / scale);
            }
        }
    }
    return worst;
}

/// Residual of the gauge-transformed pair x^{−α/2}ψ in the unweighted
/// equation φ'' + V_{α,ξ}φ = 0, relative to the largest term.
inline double unweighted_residual(const SolutionPair& pair, const FiberProblem& p, std::span<const double> xs) {
    const FiberProblem flat = p.with_form(Form::Unweighted);
    double worst = 0.0;
    for (double x : xs) {
        const double v = potential(flat, x);
        for (std::size_t s = 0; s < 2; ++s) {
            const auto d = pair[s].gauged(-0.5 * p.alpha()).scaled(x);
            const double t1 = d.second;
            const double t2 = v * d.value;
            // The two parts of V can cancel, so scale by each separately.
            const double drift = p.mode() * p.mode() * std::pow(x, 2.0 * p.alpha()) * d.value;
            const double centrifugal = (v + p.mode() * p.mode() * std::pow(x, 2.0 * p.alpha())) * d.value;
            const double scale = std::max({std::abs(t1), std::abs(drift), std::abs(centrifugal)});
            if (scale > 0.0) {
                worst = std::max(worst, std::abs(t1 + t2) / scale);
            }
        }
    }
    return worst;
}

/// x^{−α}(ψ₁ψ₂' − ψ₁'ψ₂): constant in x for solutions of the weighted form.
inline double modified_wronskian(const SolutionPair& pair, double alpha, double x) {
    const auto d1 = pair.first.scaled(x);
    const auto d2 = pair.second.scaled(x);
    const double exponent = pair.first.exponent_at(x) + pair.second.exponent_at(x);
    return std::pow(x, -alpha) * std::exp(exponent) * (d1.value * d2.first - d1.first * d2.value);
}

// ---------------------------------------------------------------------------
// Desk-scale action on sampled functions
// ---------------------------------------------------------------------------

/// Complex samples on a strictly increasing positive grid. Only nodes in
/// [valid_lo, valid_hi) carry meaningful values.
struct SampledFunction {
    std::vector<double> x;
    std::vector<std::complex<double>> values;
    std::size_t valid_lo = 0;
    std::size_t valid_hi = 0;

    template <class F>
    static SampledFunction sample(std::vector<double> grid, F&& f) {
        SampledFunction s;
        s.values.reserve(grid.size());
        for (double x : grid) {
            s.values.emplace_back(f(x));
        }
        s.x = std::move(grid);
        s.valid_hi = s.x.size();
        return s;
    }
};

namespace detail {

inline void check_grid(const SampledFunction& f) {
    if (f.x.size() != f.values.size()) {
        throw DomainError("sampled function: grid and values differ in length");
    }
    if (f.x.size() < 5) {
        throw GridTooCoarse("need at least 5 grid points, got " + std::to_string(f.x.size()));
    }
    if (!(f.x.front() > 0.0)) {
        throw DomainError("sampled function: grid must lie in (0, inf)");
    }
    for (std::size_t i = 1; i < f.x.size(); ++i) {
        if (!(f.x[i] > f.x[i - 1])) {
            throw DomainError("sampled function: grid must be strictly increasing");
        }
    }
}

}  // namespace detail

/// ψ'' + V_{α,ξ}ψ by central differences; the two boundary nodes are invalid.
inline SampledFunction apply_fiber_operator(const FiberProblem& p, const SampledFunction& psi) {
    if (p.form() != Form::Unweighted) {
        throw DomainError("apply_fiber_operator: defined for the unweighted form only");
    }
    detail::check_grid(psi);
    const std::size_t n = psi.x.size();
    SampledFunction out;
    out.x = psi.x;
    out.values.assign(n, {0.0, 0.0});
    out.valid_lo = std::max<std::size_t>(psi.valid_lo, 1);
    out.valid_hi = std::min(psi.valid_hi == 0 ? n : psi.valid_hi, n - 1);
    const std::span<const double> x(psi.x);
    const std::span<const std::complex<double>> v(psi.values);
    for (std::size_t i = out.valid_lo; i < out.valid_hi; ++i) {
        out.values[i] = fd::second_derivative(x, v, i) + potential(p, x[i]) * v[i];
    }
    return out;
}

/// Trapezoid inner product ⟨u, v⟩ = Σ w_i conj(u_i) v_i over the nodes valid in both.
inline std::complex<double> inner_product(const SampledFunction& u, const SampledFunction& v) {
    if (u.x != v.x) {
        throw DomainError("inner_product: functions live on different grids");
    }
    const std::size_t lo = std::max(u.valid_lo, v.valid_lo);
    const std::size_t hi = std::min(u.valid_hi == 0 ? u.x.size() : u.valid_hi,
                                    v.valid_hi == 0 ? v.x.size() : v.valid_hi);
    const auto w = fd::trapezoid_weights(u.x, lo, hi);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = lo; i < hi; ++i) {
        acc += w[i] * std::conj(u.values[i]) * v.values[i];
    }
    return acc;
}

/// |⟨Aφ, ψ⟩ − ⟨φ, Aψ⟩| for functions supported inside the grid.
inline double symmetry_residual(const FiberProblem& p, const SampledFunction& phi, const SampledFunction& psi) {
    const SampledFunction a_phi = apply_fiber_operator(p, phi);
    const SampledFunction a_psi = apply_fiber_operator(p, psi);
    return std::abs(inner_product(a_phi, psi) - inner_product(phi, a_psi));
}

}  // namespace grushin::fiber

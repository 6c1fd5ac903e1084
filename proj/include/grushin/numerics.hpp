#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "grushin/common.hpp"

namespace grushin::numerics {

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    std::size_t max_subdivisions = 2000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
            throw DomainError("quadrature tolerances must be strictly positive");
        }
        if (max_subdivisions < 1) {
            throw DomainError("max_subdivisions must be at least 1");
        }
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t subdivisions = 0;
    bool converged = false;
};

namespace detail {

using Kronrod21 = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss10 = boost::math::quadrature::gauss<double, 10>;

struct Panel {
    double a;
    double b;
    double value;
    double error;
};

// One 21-point Kronrod panel with the embedded 10-point Gauss rule as error
// estimate. Nodes are interior, so an integrable singularity at a or b is
// never evaluated.
template <class G>
Panel kronrod_panel(G& g, double a, double b) {
    const auto& nodes = Kronrod21::abscissa();
    const auto& wk = Kronrod21::weights();
    const auto& wg = Gauss10::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double kronrod = wk[0] * g(mid);
    double gauss = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double fp = g(mid + half * nodes[i]);
        const double fm = g(mid - half * nodes[i]);
        kronrod += wk[i] * (fp + fm);
        if (i % 2 == 1) {
            gauss += wg[i / 2] * (fp + fm);
        }
    }
    kronrod *= half;
    gauss *= half;
    const double err = std::max(std::abs(kronrod - gauss),
                                2.0 * std::numeric_limits<double>::epsilon() * std::abs(kronrod));
    return {a, b, kronrod, err};
}

/// Globally adaptive bisection: always splits the panel with the largest
/// error estimate. Never throws on budget exhaustion; the caller decides.
template <class G>
QuadratureResult adaptive_integrate(G&& g, double a, double b, const QuadratureSpec& spec) {
    auto by_error = [](const Panel& l, const Panel& r) { return l.error < r.error; };
    std::vector<Panel> heap;
    heap.reserve(std::min<std::size_t>(spec.max_subdivisions + 1, 4096));
    heap.push_back(kronrod_panel(g, a, b));
    double total = heap.front().value;
    double total_err = heap.front().error;

    QuadratureResult out;
    for (;;) {
        const double target = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
        if (!std::isfinite(total)) {
            out.converged = false;
            break;
        }
        if (total_err <= target) {
            out.converged = true;
            break;
        }
        if (heap.size() >= spec.max_subdivisions) {
            break;
        }
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;  // panel at floating-point resolution
        }
        const Panel left = kronrod_panel(g, worst.a, mid);
        const Panel right = kronrod_panel(g, mid, worst.b);
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
        // Recompute rather than update incrementally to avoid drift.
        total = 0.0;
        total_err = 0.0;
        for (const auto& p : heap) {
            total += p.value;
            total_err += p.error;
        }
    }
    out.value = total;
    out.error = total_err;
    out.subdivisions = heap.size();
    return out;
}

template <class F>
double squared_magnitude(const F& f, double x) {
    return std::norm(f(x));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cutoff ladders
// ---------------------------------------------------------------------------

/// Geometric sequence of cutoffs approaching one endpoint of (0, ∞):
/// decreasing towards 0, increasing towards ∞.
class CutoffLadder {
public:
    CutoffLadder(Endpoint endpoint, std::vector<double> cutoffs)
        : endpoint_(endpoint), cutoffs_(std::move(cutoffs)) {
        if (cutoffs_.size() < 4) {
            throw DomainError("a cutoff ladder needs at least 4 rungs");
        }
        for (std::size_t i = 0; i < cutoffs_.size(); ++i) {
            if (!(cutoffs_[i] > 0.0) || !std::isfinite(cutoffs_[i])) {
                throw DomainError("ladder cutoffs must lie in (0, inf)");
            }
            if (i > 0) {
                const bool ok = endpoint_ == Endpoint::Zero ? cutoffs_[i] < cutoffs_[i - 1]
                                                            : cutoffs_[i] > cutoffs_[i - 1];
                if (!ok) {
                    throw DomainError("ladder cutoffs must be strictly monotone towards the endpoint");
                }
            }
        }
    }

    static CutoffLadder geometric(Endpoint endpoint, double start, double ratio, std::size_t rungs) {
        require_positive(start, "ladder start");
        require_positive(ratio, "ladder ratio");
        std::vector<double> c(rungs);
        for (std::size_t j = 0; j < rungs; ++j) {
            c[j] = start * std::pow(ratio, static_cast<double>(j));
        }
        return CutoffLadder(endpoint, std::move(c));
    }

    /// ε_j = 0.1·2^{-j} or R_j = 10·2^j, 20 rungs.
    static CutoffLadder standard(Endpoint endpoint) {
        return endpoint == Endpoint::Zero ? geometric(endpoint, 1e-1, 0.5, 20)
                                          : geometric(endpoint, 10.0, 2.0, 20);
    }

    /// Reaches ~1e-289 (or ~1e289) in ratio-16 steps. Needed for the
    /// exp(c·x^γ) solutions with |γ| ≪ 1, whose true power-law behaviour
    /// only emerges at astronomically small or large x.
    static CutoffLadder deep(Endpoint endpoint) {
        return endpoint == Endpoint::Zero ? geometric(endpoint, 1e-1, 1.0 / 16.0, 240)
                                          : geometric(endpoint, 10.0, 16.0, 240);
    }

    Endpoint endpoint() const noexcept { return endpoint_; }
    std::span<const double> cutoffs() const noexcept { return cutoffs_; }
    std::size_t size() const noexcept { return cutoffs_.size(); }
    double front() const { return cutoffs_.front(); }
    double back() const { return cutoffs_.back(); }

private:
    Endpoint endpoint_;
    std::vector<double> cutoffs_;
};

/// ∫_a^b |f(x)|² x^β dx. An infinite b is only accepted together with a
/// truncation ladder; the integral is then taken up to the ladder's last rung.
template <class F>
double quad_weighted(F&& f, double weight_exponent, double a, double b,
                     const QuadratureSpec& spec = {},
                     const std::optional<CutoffLadder>& truncation = std::nullopt) {
    spec.validate();
    if (!(a >= 0.0) || !std::isfinite(a)) {
        throw DomainError("quad_weighted: lower limit must be a finite non-negative real");
    }
    if (std::isinf(b)) {
        if (!truncation || truncation->endpoint() != Endpoint::Infinity) {
            throw DomainError("quad_weighted: an infinite upper limit needs an Infinity cutoff ladder");
        }
        b = truncation->back();
    }
    if (!(b > a)) {
        throw DomainError("quad_weighted: interval must satisfy a < b");
    }
    auto integrand = [&](double x) {
        const double v = detail::squared_magnitude(f, x) * std::pow(x, weight_exponent);
        if (!std::isfinite(v)) {
            throw DomainError("quad_weighted: integrand not finite at x = " + std::to_string(x));
        }
        return v;
    };
    const QuadratureResult r = detail::adaptive_integrate(integrand, a, b, spec);
    if (!r.converged) {
        throw NonConvergence("quad_weighted: subdivision budget exhausted on (" + std::to_string(a) +
                             ", " + std::to_string(b) + "), error estimate " +
                             std::to_string(r.error));
    }
    return r.value;
}

// ---------------------------------------------------------------------------
// Square-integrability near an endpoint
// ---------------------------------------------------------------------------

struct TailFit {
    /// Slope of log(window integral) against log(cutoff). Windows shrink like
    /// cutoff^s, so the integral converges at Zero iff s > 0 and at Infinity
    /// iff s < 0.
    double estimated_exponent = 0.0;
    /// Half-width of the band of local window exponents (plus a minimum
    /// width) used to separate the verdict from the logarithmic edge.
    double confidence = 0.0;
    bool converged = false;
    /// (cutoff, ∫ between first rung and cutoff). Nondecreasing in value.
    std::vector<std::pair<double, double>> partial_sums;
    /// Set when the integrand overflowed and the verdict was short-circuited.
    bool overflow = false;
};

struct IntegrabilityResult {
    bool finite = false;
    TailFit fit;
};

class InconclusiveError : public Error {
public:
    InconclusiveError(const std::string& what, TailFit fit)
        : Error(ErrorKind::Inconclusive, what), fit_(std::move(fit)) {}

    const TailFit& fit() const noexcept { return fit_; }

private:
    TailFit fit_;
};

struct IntegrabilityOptions {
    /// Number of deepest windows used in the exponent fit.
    std::size_t fit_windows = 6;
    /// Minimum confidence half-width around the fitted exponent.
    double min_confidence = 2e-3;
    QuadratureSpec window_quadrature{1e-10, 1e-300, 2000};
};

namespace detail {

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Log of ∫_{t_lo}^{t_hi} exp(ell(t)) dt, where ell is the log-integrand in
// t = ln x. Returns +inf when ell overflowed somewhere in the window.
template <class L>
double log_window_integral(const L& ell, double t_lo, double t_hi, const QuadratureSpec& spec) {
    constexpr int kSamples = 17;
    double m = -std::numeric_limits<double>::infinity();
    double t_star = t_lo;
    for (int i = 0; i < kSamples; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / (kSamples - 1);
        const double v = ell(t);
        if (std::isnan(v)) {
            throw DomainError("integrability: integrand is NaN at x = " + std::to_string(std::exp(t)));
        }
        if (v == std::numeric_limits<double>::infinity()) {
            return v;
        }
        if (v > m) {
            m = v;
            t_star = t;
        }
    }
    if (m == -std::numeric_limits<double>::infinity()) {
        return m;
    }
    bool overflow = false;
    auto h = [&](double t) {
        const double v = ell(t);
        if (v == std::numeric_limits<double>::infinity()) {
            overflow = true;
            return 0.0;
        }
        return std::exp(v - m);
    };
    const QuadratureResult r = adaptive_integrate(h, t_lo, t_hi, spec);
    if (overflow) {
        return std::numeric_limits<double>::infinity();
    }
    if (r.value > 0.0 && std::isfinite(r.value)) {
        return m + std::log(r.value);
    }
    // The integrand is a spike narrower than any quadrature node can see.
    // Laplace-type estimate: mass ≈ exp(m) / |ell'(t*)|.
    const double width = t_hi - t_lo;
    const double eta = 1e-6 * width;
    const double t_in = t_star + (t_star - t_lo < 0.5 * width ? eta : -eta);
    const double slope = std::abs(ell(t_in) - m) / eta;
    return m - std::log(std::max(slope, 1.0 / width));
}

// Shared core for value-domain and log-domain integrands. log_sq(x) must
// return log(|f(x)|²).
template <class LogSq>
IntegrabilityResult integrability_core(const LogSq& log_sq, double weight_exponent,
                                       const CutoffLadder& ladder, const IntegrabilityOptions& opt) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const bool at_zero = ladder.endpoint() == Endpoint::Zero;
    // Measure x^β dx = x^{β+1} dt with t = ln x.
    auto ell = [&](double t) { return log_sq(std::exp(t)) + (weight_exponent + 1.0) * t; };

    const auto cuts = ladder.cutoffs();
    TailFit fit;
    std::vector<double> log_cut;
    std::vector<double> log_window;
    double log_sum = -kInf;
    for (std::size_t j = 1; j < cuts.size(); ++j) {
        const double t_a = std::log(cuts[j - 1]);
        const double t_b = std::log(cuts[j]);
        const double lw = log_window_integral(ell, std::min(t_a, t_b), std::max(t_a, t_b),
                                              opt.window_quadrature);
        if (lw == kInf) {
            fit.overflow = true;
            fit.estimated_exponent = at_zero ? -kInf : kInf;
            fit.partial_sums.emplace_back(cuts[j], kInf);
            fit.converged = false;
            return {false, std::move(fit)};
        }
        log_sum = log_add(log_sum, lw);
        fit.partial_sums.emplace_back(cuts[j], std::exp(log_sum));
        log_cut.push_back(t_b);
        log_window.push_back(lw);
    }

    // Fit on the deepest windows that carry mass.
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = log_cut.size(); i-- > 0 && pts.size() < opt.fit_windows;) {
        if (std::isfinite(log_window[i])) {
            pts.emplace_back(log_cut[i], log_window[i]);
        }
    }
    const bool vanishes = std::all_of(log_window.begin(), log_window.end(),
                                      [](double v) { return v == -std::numeric_limits<double>::infinity(); });
    if (vanishes) {
        fit.estimated_exponent = at_zero ? kInf : -kInf;
        fit.converged = true;
        return {true, std::move(fit)};
    }
    if (pts.size() < 3) {
        throw InconclusiveError("integrability: fewer than 3 usable windows for the exponent fit", fit);
    }
    std::reverse(pts.begin(), pts.end());
    const double n = static_cast<double>(pts.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    const double slope = sxy / sxx;
    // Band spanned by the fit and every local slope between fitted windows;
    // the verdict needs the whole band on one side of 0.
    double lo = slope;
    double hi = slope;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double local = (pts[i].second - pts[i - 1].second) / (pts[i].first - pts[i - 1].first);
        lo = std::min(lo, local);
        hi = std::max(hi, local);
    }
    lo -= opt.min_confidence;
    hi += opt.min_confidence;
    fit.estimated_exponent = slope;
    fit.confidence = 0.5 * (hi - lo);

    if (!std::isfinite(slope) || (lo <= 0.0 && hi >= 0.0)) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "integrability: fitted exponent %.6g, band [%.6g, %.6g] contains 0",
                      slope, lo, hi);
        throw InconclusiveError(msg, fit);
    }
    const double towards_convergence = at_zero ? slope : -slope;
    // A convergent exponent makes the windows beyond the last rung a
    // geometric series with ratio (r_last)^s < 1, so the tail is finite.
    fit.converged = towards_convergence > 0.0;
    return {fit.converged, std::move(fit)};
}

}  // namespace detail

/// Decides whether ∫ |f|² x^β dx is finite near the ladder's endpoint by
/// fitting the decay of window integrals between consecutive rungs.
/// Throws InconclusiveError when the fitted exponent cannot be separated
/// from the logarithmic edge.
template <class F>
IntegrabilityResult integrability_verdict(F&& f, double weight_exponent, Endpoint endpoint,
                                          const CutoffLadder& ladder,
                                          const IntegrabilityOptions& opt = {}) {
    if (ladder.endpoint() != endpoint) {
        throw DomainError("integrability_verdict: ladder approaches the other endpoint");
    }
    // 2·log|f| rather than log|f|²: |f| may be representable when |f|² is not.
    auto log_sq = [&](double x) {
        const double m = std::abs(f(x));
        return std::isinf(m) ? std::numeric_limits<double>::infinity() : 2.0 * std::log(m);
    };
    return detail::integrability_core(log_sq, weight_exponent, ladder, opt);
}

/// Same as integrability_verdict, but takes log|f| so that integrands far
/// beyond double range (exp(c·x^γ) at extreme x) stay representable.
template <class LogF>
IntegrabilityResult integrability_verdict_log(LogF&& log_abs_f, double weight_exponent,
                                              Endpoint endpoint, const CutoffLadder& ladder,
                                              const IntegrabilityOptions& opt = {}) {
    if (ladder.endpoint() != endpoint) {
        throw DomainError("integrability_verdict: ladder approaches the other endpoint");
    }
    auto log_sq = [&](double x) { return 2.0 * log_abs_f(x); };
    return detail::integrability_core(log_sq, weight_exponent, ladder, opt);
}

// ---------------------------------------------------------------------------
// Second-order linear ODE ψ'' = W(x) ψ
// ---------------------------------------------------------------------------

struct OdeSpec {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double initial_step = 1e-3;
    /// When set, classical fixed-step integration with this step size.
    std::optional<double> fixed_step;
    std::size_t max_steps = 2'000'000;
};

struct OdeSample {
    double x;
    double value;
    double derivative;
};

using Trajectory = std::vector<OdeSample>;

/// Dormand–Prince 5(4) integration of ψ'' = W(x)ψ from x0 to x1 (either
/// direction). Samples at `sample_points` when given (they must lie between
/// x0 and x1, ordered in the direction of integration), otherwise at every
/// accepted step. The first sample is always the initial point.
template <class W>
Trajectory integrate_ode(W&& w, double x0, double x1, std::array<double, 2> init,
                         const OdeSpec& spec = {}, std::span<const double> sample_points = {}) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    require_positive(x0, "integrate_ode: x0");
    require_positive(x1, "integrate_ode: x1");
    if (x0 == x1) {
        return {{x0, init[0], init[1]}};
    }
    const double dir = x1 > x0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < sample_points.size(); ++i) {
        const double s = sample_points[i];
        if ((s - x0) * dir < 0.0 || (s - x1) * dir > 0.0) {
            throw DomainError("integrate_ode: sample point outside the integration interval");
        }
        if (i > 0 && (s - sample_points[i - 1]) * dir <= 0.0) {
            throw DomainError("integrate_ode: sample points must be strictly ordered along the integration");
        }
    }

    auto rhs = [&](const State& s, State& ds, double x) {
        ds[0] = s[1];
        ds[1] = w(x) * s[0];
    };

    Trajectory out;
    double last_valid = x0;
    std::size_t steps = 0;
    auto observer = [&](const State& s, double x) {
        if (!std::isfinite(s[0]) || !std::isfinite(s[1])) {
            throw StepUnderflow("integrate_ode: solution left double range; last valid x = " +
                                std::to_string(last_valid));
        }
        if (++steps > spec.max_steps) {
            throw StepUnderflow("integrate_ode: step budget exhausted; last valid x = " +
                                std::to_string(last_valid));
        }
        last_valid = x;
        out.push_back({x, s[0], s[1]});
    };

    std::vector<double> times;
    if (!sample_points.empty()) {
        times.push_back(x0);
        for (double s : sample_points) {
            if (s != x0) times.push_back(s);
        }
    }

    State state = init;
    try {
        if (spec.fixed_step) {
            require_positive(*spec.fixed_step, "integrate_ode: fixed step");
            odeint::runge_kutta_dopri5<State> stepper;
            const double h = dir * *spec.fixed_step;
            if (times.empty()) {
                const auto n = static_cast<std::size_t>(std::llround(std::abs(x1 - x0) / *spec.fixed_step));
                if (std::abs(x0 + static_cast<double>(n) * h - x1) > 1e-9 * std::abs(x1 - x0)) {
                    throw DomainError("integrate_ode: fixed step must divide the interval");
                }
                odeint::integrate_n_steps(stepper, rhs, state, x0, h, n, observer);
            } else {
                odeint::integrate_times(stepper, rhs, state, times.begin(), times.end(), h, observer);
            }
        } else {
            auto stepper = odeint::make_controlled(spec.abs_tol, spec.rel_tol,
                                                   odeint::runge_kutta_dopri5<State>());
            const double h = dir * spec.initial_step;
            if (times.empty()) {
                odeint::integrate_adaptive(stepper, rhs, state, x0, x1, h, observer);
            } else {
                odeint::integrate_times(stepper, rhs, state, times.begin(), times.end(), h, observer);
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw StepUnderflow(std::string("integrate_ode: ") + e.what() + "; last valid x = " +
                            std::to_string(last_valid));
    }
    return out;
}

}  // namespace grushin::numerics

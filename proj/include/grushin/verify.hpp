#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "grushin/aggregate.hpp"
#include "grushin/fiber.hpp"
#include "grushin/geometry.hpp"
#include "grushin/numerics.hpp"
#include "grushin/report.hpp"
#include "grushin/weyl.hpp"

namespace grushin::verify {

struct SuiteResult {
    std::string name;
    std::size_t checks = 0;
    std::vector<std::string> failures;

    bool passed() const { return failures.empty(); }

    void check(bool ok, const std::string& what) {
        ++checks;
        if (!ok) failures.push_back(what);
    }
};

/// 400 points uniform on [−5, 3] plus the exact regime boundaries.
inline std::vector<double> theorem_grid() {
    std::vector<double> a;
    a.reserve(403);
    for (int i = 0; i < 400; ++i) {
        a.push_back(-5.0 + 8.0 * i / 399.0);
    }
    for (double b : {-3.0, -1.0, 1.0}) a.push_back(b);
    return a;
}

inline bool plane_theorem(double a) { return a < -1.0 || a >= 1.0; }
inline bool cylinder_theorem(double a) { return a <= -3.0 || a >= 1.0; }

namespace detail {

inline std::string at(double alpha, double mode = std::nan("")) {
    std::ostringstream s;
    s << "alpha=" << io::format_real(alpha);
    if (!std::isnan(mode)) s << " mode=" << io::format_real(mode);
    return s.str();
}

}  // namespace detail

inline SuiteResult atlas_vs_theorem() {
    SuiteResult r{"atlas-vs-theorem"};
    for (double a : theorem_grid()) {
        const auto p = aggregate::plane_verdict(a);
        r.check(p.essentially_self_adjoint == plane_theorem(a), "plane " + detail::at(a));
        r.check(p.essentially_self_adjoint == p.failing_modes.measure_is_zero(), "plane measure rule " + detail::at(a));
        const auto c = aggregate::cylinder_verdict(a);
        r.check(c.essentially_self_adjoint == cylinder_theorem(a), "cylinder " + detail::at(a));
        using K = aggregate::ModeSetKind;
        if (a > -3.0 && a < -1.0) {
            r.check(c.failing_modes.kind == K::SingletonIntegerZero, "cylinder failing set " + detail::at(a));
        } else if (a > -1.0 && a < 1.0) {
            r.check(c.failing_modes.kind == K::AllIntegerModes, "cylinder failing set " + detail::at(a));
        }
    }
    return r;
}

inline SuiteResult contrast() {
    SuiteResult r{"contrast"};
    for (double a : theorem_grid()) {
        const auto p = aggregate::plane_verdict(a);
        const auto c = aggregate::cylinder_verdict(a);
        r.check(!c.essentially_self_adjoint || p.essentially_self_adjoint, "cylinder ESA without plane ESA " + detail::at(a));
        if (a > -3.0 && a <= -1.0) {
            // The plane fails at α = −1 itself; the contrast holds on (−3, −1).
            if (a < -1.0) r.check(p.essentially_self_adjoint, "plane ESA " + detail::at(a));
            r.check(!c.essentially_self_adjoint, "cylinder not ESA " + detail::at(a));
            r.check(c.total_deficiency == aggregate::TotalDeficiency{false, 1}, "total deficiency 1 " + detail::at(a));
        }
    }
    return r;
}

inline std::vector<double> oracle_alphas() {
    return {-4, -3.5, -2.5, -2, -1.5, -1.01, -0.99, -0.5, 0, 0.5, 0.99, 1.5, 2};
}

inline std::vector<double> oracle_modes() { return {0, 0.5, -0.5, 0.99, -0.99, 1.5, -1.5, 3, -3}; }

inline SuiteResult oracle_equivalence() {
    SuiteResult r{"oracle-equivalence"};
    for (double a : oracle_alphas()) {
        for (double xi : oracle_modes()) {
            const auto p = fiber::FiberProblem::plane(a, xi);
            if (weyl::near_regime_boundary(p)) continue;
            for (Endpoint e : {Endpoint::Zero, Endpoint::Infinity}) {
                const std::string where = detail::at(a, xi) + " endpoint=" + std::string(to_string(e));
                try {
                    const auto n = weyl::classify_endpoint_numeric(p, e);
                    r.check(n.endpoint_class == weyl::classify_endpoint_symbolic(p, e).endpoint_class,
                            "disagreement " + where);
                } catch (const numerics::InconclusiveError&) {
                    r.check(false, "inconclusive " + where);
                }
            }
        }
    }
    return r;
}

/// Twenty (α, ξ) pairs covering all four solution branches.
inline std::vector<std::pair<double, double>> residual_pairs() {
    return {{0.5, 0},  {-2, 0},   {2, 0},    {-4, 0},  {0, 0},     {-1, 0},   {0, 1},
            {0.5, 3},  {-2, 1},   {2, -1},   {-0.5, 0.5}, {1.5, 2}, {-3.5, -3}, {-1.5, 0.99},
            {-1, 0.5}, {-1, -2},  {-1, 0.99}, {-1, 3},  {-1, 1.5},  {3, 0.25}};
}

inline std::vector<double> residual_points() { return geometry::log_spaced(0.05, 20.0, 200); }

inline SuiteResult ode_residual() {
    SuiteResult r{"ode-residual"};
    const auto xs = residual_points();
    for (auto [a, xi] : residual_pairs()) {
        const auto p = fiber::FiberProblem::plane(a, xi);
        const auto pair = fiber::closed_form_solutions(p);
        r.check(fiber::ode_residual(pair, p, xs) <= 1e-8, "weighted residual " + detail::at(a, xi));
        r.check(fiber::unweighted_residual(pair, p, xs) <= 1e-8, "gauged residual " + detail::at(a, xi));
    }
    return r;
}

/// Ten pairs away from branch boundaries whose solutions stay well
/// conditioned for forward integration on [0.2, 5].
inline std::vector<std::pair<double, double>> integration_pairs() {
    return {{0, 0.5}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {-0.5, 1}, {-2, 0}, {-2, 0.5}, {-1.5, 1}, {1.5, 0.3}, {2, 0}};
}

/// Worst relative error at x ∈ {0.2, 5} of integrate_ode started at x = 1
/// from the gauged closed form's data, over both solutions.
inline double integration_error(double alpha, double xi) {
    const auto p = fiber::FiberProblem::plane(alpha, xi, fiber::Form::Unweighted);
    const auto pair = fiber::closed_form_solutions(p);
    auto w = [&p](double x) { return -fiber::potential(p, x); };
    double worst = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
        const fiber::ClosedForm g = pair[s].gauged(-0.5 * alpha);
        const auto d = g.derivatives(1.0);
        for (double end : {0.2, 5.0}) {
            const auto traj = numerics::integrate_ode(w, 1.0, end, {d[0], d[1]});
            const double exact = g.value(end);
            worst = std::max(worst, std::abs(traj.back().value - exact) / std::abs(exact));
        }
    }
    return worst;
}

inline SuiteResult ode_integration() {
    SuiteResult r{"ode-integration"};
    for (auto [a, xi] : integration_pairs()) {
        double err = 0.0;
        try {
            err = integration_error(a, xi);
        } catch (const Error& e) {
            r.check(false, detail::at(a, xi) + ": " + e.what());
            continue;
        }
        r.check(err <= 1e-6, "relative error " + io::format_real(err) + " at " + detail::at(a, xi));
    }
    return r;
}

inline SuiteResult deficiency() {
    SuiteResult r{"deficiency"};
    for (double a : oracle_alphas()) {
        for (double xi : oracle_modes()) {
            const auto p = fiber::FiberProblem::plane(a, xi);
            const auto n = weyl::deficiency_indices(p);
            int circles = 0;
            for (Endpoint e : {Endpoint::Zero, Endpoint::Infinity}) {
                if (weyl::classify_endpoint_symbolic(p, e).endpoint_class == weyl::EndpointClass::LimitCircle) ++circles;
            }
            r.check(n.n_plus == circles && n.n_plus == n.n_minus && n.n_plus >= 0 && n.n_plus <= 2,
                    "indices " + detail::at(a, xi));
        }
    }
    return r;
}

/// Smooth bump centred at x = 1, y = 0, negligible at the grid edges.
inline geometry::GridFunction bump(std::size_t n, double weight_exponent, Topology t) {
    auto x = geometry::log_spaced(0.25, 4.0, n);
    auto y = t == Topology::Plane ? geometry::periodic_grid(-8.0, 16.0, n)
                                  : geometry::periodic_grid(-std::numbers::pi, 2.0 * std::numbers::pi, n);
    return geometry::GridFunction::sample(std::move(x), std::move(y), weight_exponent, [](double x, double y) {
        const double l = std::log(x);
        return std::exp(-l * l / (2.0 * 0.15 * 0.15) - y * y / 2.0);
    });
}

inline std::vector<double> intertwining_alphas() { return {0, 0.5, 1, -1, -2}; }

inline SuiteResult unitarity() {
    SuiteResult r{"unitarity"};
    for (double a : intertwining_alphas()) {
        for (Topology t : {Topology::Plane, Topology::Cylinder}) {
            const geometry::GrushinModel m{a, t};
            const auto psi = bump(128, -a, t);
            const double n0 = psi.norm();
            const auto g = geometry::gauge_transform(psi, m, geometry::GaugeDirection::Forward);
            r.check(std::abs(g.norm() - n0) <= 1e-12 * n0, "gauge norm " + detail::at(a));
            const auto f = geometry::fourier_y(g, m);
            r.check(std::abs(f.norm() - g.norm()) <= 1e-12 * g.norm(), "Parseval " + detail::at(a));
        }
        const geometry::GrushinModel m{a, Topology::Plane};
        double previous = 0.0;
        for (std::size_t n : {64, 128, 256}) {
            const double res = geometry::intertwining_residual(m, bump(n, -a, Topology::Plane));
            if (previous > 0.0) {
                r.check(previous / res >= 3.0, "intertwining ratio " + io::format_real(previous / res) + " at n=" +
                                                   std::to_string(n) + " " + detail::at(a));
            }
            previous = res;
        }
    }
    return r;
}

inline std::vector<std::pair<double, double>> symmetry_pairs() {
    return {{1, 1}, {0, 0}, {0.5, 2}, {-2, 1}, {-1, 0.5}};
}

/// The two test functions on the 2048-node grid used for the symmetry check.
inline std::pair<fiber::SampledFunction, fiber::SampledFunction> symmetry_fixture() {
    const auto grid = geometry::log_spaced(0.05, 10.0, 2048);
    auto phi = fiber::SampledFunction::sample(grid, [](double x) {
        return std::complex<double>(std::exp(-(x - 1.0) * (x - 1.0) / 0.08), 0.0);
    });
    auto psi = fiber::SampledFunction::sample(grid, [](double x) {
        return std::complex<double>(std::exp(-(x - 1.3) * (x - 1.3) / 0.08),
                                    0.5 * std::exp(-(x - 0.9) * (x - 0.9) / 0.05));
    });
    return {std::move(phi), std::move(psi)};
}

inline SuiteResult symmetry() {
    SuiteResult r{"symmetry"};
    const auto [phi, psi] = symmetry_fixture();
    for (auto [a, xi] : symmetry_pairs()) {
        const auto p = fiber::FiberProblem::plane(a, xi, fiber::Form::Unweighted);
        r.check(fiber::symmetry_residual(p, phi, psi) <= 1e-6, "symmetry " + detail::at(a, xi));
    }
    return r;
}

inline SuiteResult determinism() {
    SuiteResult r{"determinism"};
    const auto alphas = aggregate::alpha_range(-4.0, 2.0, 0.25);
    auto render = [&alphas](unsigned jobs) {
        const auto rows = aggregate::regime_atlas(alphas, jobs);
        std::ostringstream csv, js;
        report::write_atlas_csv(csv, rows);
        report::write_atlas_json(js, rows);
        return csv.str() + js.str();
    };
    const std::string once = render(1);
    r.check(once == render(1), "repeat run differs");
    r.check(once == render(4), "jobs=4 differs from jobs=1");
    return r;
}

struct Suite {
    std::string name;
    std::function<SuiteResult()> run;
};

inline const std::vector<Suite>& suites() {
    static const std::vector<Suite> all{
        {"atlas-vs-theorem", atlas_vs_theorem},
        {"contrast", contrast},
        {"oracle-equivalence", oracle_equivalence},
        {"ode-residual", ode_residual},
        {"ode-integration", ode_integration},
        {"deficiency", deficiency},
        {"unitarity", unitarity},
        {"symmetry", symmetry},
        {"determinism", determinism},
    };
    return all;
}

}  // namespace grushin::verify

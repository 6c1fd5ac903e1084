#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "grushin/fiber.hpp"
#include "grushin/geometry.hpp"
#include "grushin/numerics.hpp"

using namespace grushin;
using namespace grushin::fiber;

namespace {

std::vector<double> sample_xs() { return geometry::log_spaced(0.05, 20.0, 120); }

/// (α, ξ) pairs spanning the four branches, including negative ξ.
std::vector<std::pair<double, double>> branch_grid() {
    return {{0.5, 0},  {-2, 0},   {2, 0},     {-4, 0},  {-1, 0},  {0, 1},    {0, -1},
            {0.5, 3},  {-2, 1},   {-3.5, -2}, {1.5, 2}, {-1, 0.5}, {-1, -2}, {-1, 0.99}};
}

double gaussian(double x, double c, double w) { return std::exp(-(x - c) * (x - c) / w); }

}  // namespace

TEST(FiberProblem, Invariants) {
    EXPECT_THROW(FiberProblem(0.5, 1.5, Topology::Cylinder), DomainError);
    EXPECT_THROW(FiberProblem::plane(NAN, 1.0), DomainError);
    EXPECT_THROW(FiberProblem::plane(1.0, INFINITY), DomainError);
    EXPECT_NO_THROW(FiberProblem::cylinder(0.5, -3));
    const auto p = FiberProblem::plane(1.0, 2.0);
    EXPECT_EQ(p.form(), Form::Weighted);
    EXPECT_EQ(p.with_form(Form::Unweighted).form(), Form::Unweighted);
}

TEST(Potential, Examples) {
    for (double xi : {0.0, 0.3, -2.0}) {
        for (double x : {0.1, 1.0, 7.0}) {
            EXPECT_DOUBLE_EQ(potential(FiberProblem::plane(0, xi, Form::Unweighted), x), -xi * xi);
        }
    }
    EXPECT_DOUBLE_EQ(potential(FiberProblem::plane(-2, 0, Form::Unweighted), 1), 0.0);
    EXPECT_DOUBLE_EQ(potential(FiberProblem::plane(1, 2, Form::Unweighted), 1), -4.75);
}

TEST(Potential, Errors) {
    EXPECT_THROW(potential(FiberProblem::plane(1, 2), 1.0), DomainError);
    EXPECT_THROW(potential(FiberProblem::plane(1, 2, Form::Unweighted), 0.0), DomainError);
}

TEST(ClosedForm, XiZeroGeneric) {
    const auto pair = closed_form_solutions(FiberProblem::plane(0.5, 0));
    EXPECT_EQ(pair.branch, Branch::XiZeroGeneric);
    for (double x : {0.3, 2.0}) {
        EXPECT_DOUBLE_EQ(pair.first.value(x), 1.0);
        EXPECT_NEAR(pair.second.value(x), std::pow(x, 1.5), 1e-15);
    }
}

TEST(ClosedForm, AlphaMinusOneBranch) {
    const auto pair = closed_form_solutions(FiberProblem::plane(-1, 0.5));
    EXPECT_EQ(pair.branch, Branch::XiNonzeroAlphaMinusOne);
    EXPECT_NEAR(pair.first.value(4.0), 2.0, 1e-15);
    EXPECT_NEAR(pair.second.value(4.0), 0.5, 1e-15);
    EXPECT_EQ(pair.first.describe(), "x^0.5");
}

TEST(ClosedForm, FlatExponentialsAsUnorderedSet) {
    const auto pair = closed_form_solutions(FiberProblem::plane(0, 1));
    EXPECT_EQ(pair.branch, Branch::XiNonzeroGeneric);
    for (double x : {0.2, 1.0, 3.0}) {
        std::vector<double> got{pair.first.value(x), pair.second.value(x)};
        std::vector<double> want{std::exp(x), std::exp(-x)};
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        EXPECT_NEAR(got[0] / want[0], 1.0, 1e-14);
        EXPECT_NEAR(got[1] / want[1], 1.0, 1e-14);
    }
}

TEST(ClosedForm, LogarithmicBranch) {
    const auto pair = closed_form_solutions(FiberProblem::plane(-1, 0));
    EXPECT_EQ(pair.branch, Branch::XiZeroAlphaMinusOne);
    EXPECT_DOUBLE_EQ(pair.second.value(std::exp(2.0)), 2.0);
    EXPECT_TRUE(pair.asymptotic_exponents[1][0].logarithmic);
}

TEST(ClosedForm, BranchSplitIsExact) {
    EXPECT_EQ(closed_form_solutions(FiberProblem::plane(-1 + 1e-15, 0)).branch, Branch::XiZeroGeneric);
    EXPECT_EQ(closed_form_solutions(FiberProblem::plane(-1, 1e-300)).branch, Branch::XiNonzeroAlphaMinusOne);
    EXPECT_EQ(closed_form_solutions(FiberProblem::cylinder(0.5, 0)).branch, Branch::XiZeroGeneric);
    EXPECT_EQ(closed_form_solutions(FiberProblem::cylinder(-1, 2)).branch, Branch::XiNonzeroAlphaMinusOne);
}

TEST(ClosedForm, CanonicalOrderingIgnoresSignOfMode) {
    for (double a : {-2.5, -1.5, -0.5, 0.0, 1.5}) {
        const auto plus = closed_form_solutions(FiberProblem::plane(a, 2));
        const auto minus = closed_form_solutions(FiberProblem::plane(a, -2));
        for (double x : {0.5, 1.5}) {
            EXPECT_DOUBLE_EQ(plus.first.value(x), minus.first.value(x));
            EXPECT_DOUBLE_EQ(plus.second.value(x), minus.second.value(x));
        }
        // Recessive first: at ∞ when α > −1, at 0 when α < −1.
        const Endpoint e = a > -1 ? Endpoint::Infinity : Endpoint::Zero;
        const std::size_t idx = e == Endpoint::Zero ? 0 : 1;
        EXPECT_LT(plus.asymptotic_exponents[0][idx].exp_coefficient, 0.0) << a;
        EXPECT_GT(plus.asymptotic_exponents[1][idx].exp_coefficient, 0.0) << a;
    }
}

TEST(ClosedForm, AsymptoticsDropIrrelevantExponential) {
    const auto pair = closed_form_solutions(FiberProblem::plane(0.5, 3));
    // exp(±2x^{3/2}) → 1 at 0.
    EXPECT_EQ(pair.asymptotic_exponents[0][0].exp_coefficient, 0.0);
    EXPECT_EQ(pair.asymptotic_exponents[0][1].exp_coefficient, -2.0);
    EXPECT_EQ(pair.asymptotic_exponents[0][1].exp_power, 1.5);
}

TEST(OdeResidual, ClosedFormsSolveTheWeightedEquation) {
    const auto xs = sample_xs();
    for (auto [a, xi] : branch_grid()) {
        const auto p = FiberProblem::plane(a, xi);
        EXPECT_LE(ode_residual(closed_form_solutions(p), p, xs), 1e-12) << a << " " << xi;
    }
}

TEST(OdeResidual, FlatPairAtThreePoints) {
    const auto p = FiberProblem::plane(0, 1);
    const std::vector<double> xs{0.1, 1.0, 10.0};
    EXPECT_LE(ode_residual(closed_form_solutions(p), p, xs), 1e-10);
}

TEST(OdeResidual, PerturbedSolutionIsDetected) {
    const auto p = FiberProblem::plane(0.5, 0);
    auto pair = closed_form_solutions(p);
    pair.second = pair.second.gauged(0.01);
    EXPECT_GT(ode_residual(pair, p, sample_xs()), 1e-3);

    const auto q = FiberProblem::plane(0, 1);
    EXPECT_GT(ode_residual(closed_form_solutions(FiberProblem::plane(0, 2)), q, sample_xs()), 0.1);
}

TEST(OdeResidual, RejectsNonPositivePoints) {
    const auto p = FiberProblem::plane(0, 1);
    const std::vector<double> xs{1.0, 0.0};
    EXPECT_THROW(ode_residual(closed_form_solutions(p), p, xs), DomainError);
}

TEST(GaugeEquivalence, GaugedPairSolvesUnweightedEquation) {
    const auto xs = sample_xs();
    for (auto [a, xi] : branch_grid()) {
        const auto p = FiberProblem::plane(a, xi);
        EXPECT_LE(unweighted_residual(closed_form_solutions(p), p, xs), 1e-8) << a << " " << xi;
    }
}

TEST(GaugeEquivalence, AgreesWithIndependentIntegration) {
    // Away from branch boundaries and from strongly growing exponentials.
    for (auto [a, xi] : std::vector<std::pair<double, double>>{{0, 0.5}, {0.5, 0.5}, {-0.5, 1}, {-2, 0.5}, {1.5, 0.3}}) {
        const auto p = FiberProblem::plane(a, xi, Form::Unweighted);
        const auto pair = closed_form_solutions(p);
        auto w = [&](double x) { return -potential(p, x); };
        for (std::size_t s = 0; s < 2; ++s) {
            const ClosedForm g = pair[s].gauged(-a / 2);
            const auto d = g.derivatives(1.0);
            for (double end : {0.3, 3.0}) {
                const auto t = numerics::integrate_ode(w, 1.0, end, {d[0], d[1]});
                EXPECT_NEAR(t.back().value / g.value(end), 1.0, 1e-6) << a << " " << xi << " " << s;
            }
        }
    }
}

TEST(Wronskian, ConstantAndNonzero) {
    for (auto [a, xi] : branch_grid()) {
        const auto pair = closed_form_solutions(FiberProblem::plane(a, xi));
        const double w0 = modified_wronskian(pair, a, 1.0);
        EXPECT_NE(w0, 0.0);
        for (double x : {0.1, 0.5, 2.0, 4.0}) {
            EXPECT_NEAR(modified_wronskian(pair, a, x) / w0, 1.0, 1e-12) << a << " " << xi << " x=" << x;
        }
    }
}

TEST(FiberOperator, FlatBumpGivesSecondDerivative) {
    const auto p = FiberProblem::plane(0, 0, Form::Unweighted);
    const auto psi = SampledFunction::sample(geometry::log_spaced(0.2, 5, 800),
                                             [](double x) { return gaussian(x, 1.5, 0.1); });
    const auto out = apply_fiber_operator(p, psi);
    EXPECT_EQ(out.valid_lo, 1u);
    EXPECT_EQ(out.valid_hi, 799u);
    for (std::size_t i = out.valid_lo; i < out.valid_hi; ++i) {
        const double x = out.x[i];
        const double exact = gaussian(x, 1.5, 0.1) * (4 * (x - 1.5) * (x - 1.5) / 0.01 - 2 / 0.1);
        EXPECT_NEAR(out.values[i].real(), exact, 5e-3) << x;
    }
}

TEST(FiberOperator, ClosedFormInteriorResidual) {
    const double a = 0.5, xi = 0.5;
    const auto p = FiberProblem::plane(a, xi, Form::Unweighted);
    const ClosedForm g = closed_form_solutions(p).first.gauged(-a / 2);
    double previous = INFINITY;
    for (std::size_t n : {200, 400, 800}) {
        const auto psi = SampledFunction::sample(geometry::log_spaced(0.5, 3, n), [&](double x) { return g.value(x); });
        const auto out = apply_fiber_operator(p, psi);
        double worst = 0.0;
        for (std::size_t i = out.valid_lo; i < out.valid_hi; ++i) {
            worst = std::max(worst, std::abs(out.values[i]));
        }
        EXPECT_LT(worst, previous / 3.0) << n;
        previous = worst;
    }
    EXPECT_LT(previous, 1e-4);
}

TEST(FiberOperator, ZeroMapsToZero) {
    const auto p = FiberProblem::plane(1, 1, Form::Unweighted);
    const auto psi = SampledFunction::sample(geometry::log_spaced(0.2, 5, 50), [](double) { return 0.0; });
    for (const auto& v : apply_fiber_operator(p, psi).values) {
        EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
    }
}

TEST(FiberOperator, Errors) {
    const auto psi = SampledFunction::sample({0.5, 1.0, 1.5, 2.0}, [](double) { return 1.0; });
    EXPECT_THROW(apply_fiber_operator(FiberProblem::plane(1, 1, Form::Unweighted), psi), GridTooCoarse);
    const auto ok = SampledFunction::sample(geometry::log_spaced(0.2, 5, 10), [](double) { return 1.0; });
    EXPECT_THROW(apply_fiber_operator(FiberProblem::plane(1, 1), ok), DomainError);
}

TEST(Symmetry, QuadraticFormIsReal) {
    const auto p = FiberProblem::plane(1, 1, Form::Unweighted);
    const auto psi = SampledFunction::sample(geometry::log_spaced(0.05, 10, 2048), [](double x) {
        return std::complex<double>(gaussian(x, 1, 0.08), gaussian(x, 1.4, 0.05));
    });
    const auto q = inner_product(apply_fiber_operator(p, psi), psi);
    EXPECT_LT(std::abs(q.imag()), 1e-9 * std::abs(q.real()));
}

TEST(Symmetry, DisjointSupports) {
    const auto p = FiberProblem::plane(0.5, 2, Form::Unweighted);
    const auto grid = geometry::log_spaced(0.05, 10, 2048);
    const auto phi = SampledFunction::sample(grid, [](double x) { return gaussian(x, 0.5, 0.005); });
    const auto psi = SampledFunction::sample(grid, [](double x) { return gaussian(x, 5.0, 0.05); });
    EXPECT_LT(std::abs(inner_product(apply_fiber_operator(p, phi), psi)), 1e-12);
    EXPECT_LT(std::abs(inner_product(phi, apply_fiber_operator(p, psi))), 1e-12);
    EXPECT_LT(symmetry_residual(p, phi, psi), 1e-12);
}

TEST(Symmetry, FrozenBumpsOn2048Nodes) {
    const auto grid = geometry::log_spaced(0.05, 10, 2048);
    const auto phi = SampledFunction::sample(grid, [](double x) { return std::complex<double>(gaussian(x, 1, 0.08)); });
    const auto psi = SampledFunction::sample(
        grid, [](double x) { return std::complex<double>(gaussian(x, 1.3, 0.08), 0.5 * gaussian(x, 0.9, 0.05)); });
    EXPECT_LT(symmetry_residual(FiberProblem::plane(1, 1, Form::Unweighted), phi, psi), 1e-6);
}

TEST(Symmetry, GridsMustMatch) {
    const auto p = FiberProblem::plane(1, 1, Form::Unweighted);
    const auto a = SampledFunction::sample(geometry::log_spaced(0.1, 2, 16), [](double) { return 1.0; });
    const auto b = SampledFunction::sample(geometry::log_spaced(0.1, 3, 16), [](double) { return 1.0; });
    EXPECT_THROW(symmetry_residual(p, a, b), DomainError);
}

// Walks through alpha = -2, where the half-plane is confining but the
// half-cylinder is not, and prints the fiber-level reason.

#include <iostream>

#include "grushin/aggregate.hpp"
#include "grushin/fiber.hpp"
#include "grushin/weyl.hpp"

int main() {
    using namespace grushin;
    const double alpha = -2.0;

    const auto zero = fiber::FiberProblem::plane(alpha, 0.0);
    const auto pair = fiber::closed_form_solutions(zero);
    std::cout << "alpha = " << alpha << ", xi = 0: solutions " << pair.first.describe() << ", "
              << pair.second.describe() << '\n';
    for (Endpoint e : {Endpoint::Zero, Endpoint::Infinity}) {
        const auto sym = weyl::classify_endpoint_symbolic(zero, e);
        const auto num = weyl::classify_endpoint_numeric(zero, e);
        std::cout << "  endpoint " << to_string(e) << ": " << weyl::to_string(sym.endpoint_class)
                  << " (numeric oracle: " << weyl::to_string(num.endpoint_class) << ")\n";
    }

    for (double xi : {0.5, 3.0}) {
        const auto p = fiber::FiberProblem::plane(alpha, xi);
        std::cout << "alpha = " << alpha << ", xi = " << xi << ": fiber ESA = " << std::boolalpha
                  << weyl::fiber_esa(p) << '\n';
    }

    const auto plane = aggregate::plane_verdict(alpha);
    const auto cyl = aggregate::cylinder_verdict(alpha);
    std::cout << "plane:    ESA = " << plane.essentially_self_adjoint << ", failing " << plane.failing_modes.label()
              << " (measure zero: " << plane.failing_modes.measure_is_zero() << ")\n"
              << "cylinder: ESA = " << cyl.essentially_self_adjoint << ", failing " << cyl.failing_modes.label()
              << ", total deficiency " << cyl.total_deficiency->label() << '\n';
}

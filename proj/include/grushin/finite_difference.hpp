#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace grushin::fd {

// Three-point stencils on a non-uniform grid. The first derivative is
// second-order on any grid; the second derivative is second-order on
// smoothly stretched grids (uniform or log-spaced).

template <class T>
T first_derivative(std::span<const double> x, std::span<const T> f, std::size_t i) {
    const double hm = x[i] - x[i - 1];
    const double hp = x[i + 1] - x[i];
    const double den = hm * hp * (hm + hp);
    return (hm * hm * f[i + 1] + (hp * hp - hm * hm) * f[i] - hp * hp * f[i - 1]) / den;
}

template <class T>
T second_derivative(std::span<const double> x, std::span<const T> f, std::size_t i) {
    const double hm = x[i] - x[i - 1];
    const double hp = x[i + 1] - x[i];
    const double den = hm * hp * (hm + hp);
    return 2.0 * (hm * f[i + 1] - (hm + hp) * f[i] + hp * f[i - 1]) / den;
}

/// Trapezoid weights restricted to nodes [lo, hi).
inline std::vector<double> trapezoid_weights(std::span<const double> x, std::size_t lo, std::size_t hi) {
    std::vector<double> w(x.size(), 0.0);
    if (hi <= lo + 1) {
        return w;
    }
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        const double h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

}  // namespace grushin::fd

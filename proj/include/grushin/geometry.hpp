#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "grushin/common.hpp"
#include "grushin/fiber.hpp"
#include "grushin/finite_difference.hpp"

namespace grushin::geometry {

/// The Grushin manifold (M, g_α) with g_α = dx² + x^{−2α}dy² on x > 0,
/// y ∈ ℝ (Plane) or y ∈ S¹ (Cylinder).
struct GrushinModel {
    double alpha = 0.0;
    Topology topology = Topology::Plane;

    GrushinModel() = default;
    GrushinModel(double a, Topology t) : alpha(a), topology(t) {
        if (!std::isfinite(alpha)) {
            throw DomainError("GrushinModel: alpha must be finite");
        }
    }
};

struct MetricCoefficients {
    double g_xx;
    double g_yy;
};

inline MetricCoefficients metric_coefficients(const GrushinModel& m, double x) {
    require_positive(x, "metric_coefficients: x");
    return {1.0, std::pow(x, -2.0 * m.alpha)};
}

/// Gaussian curvature −α(α+1)/x².
inline double curvature(const GrushinModel& m, double x) {
    require_positive(x, "curvature: x");
    return -m.alpha * (m.alpha + 1.0) / (x * x);
}

/// Density of the Riemannian volume ω_α = x^{−α} dx∧dy.
inline double volume_weight(const GrushinModel& m, double x) {
    require_positive(x, "volume_weight: x");
    return std::pow(x, -m.alpha);
}

// ---------------------------------------------------------------------------
// Grid functions
// ---------------------------------------------------------------------------

enum class YAxis { Position, Mode };

inline std::vector<double> log_spaced(double x_min, double x_max, std::size_t n) {
    require_positive(x_min, "log_spaced: x_min");
    if (!(x_max > x_min) || n < 2) {
        throw DomainError("log_spaced: need x_max > x_min and n >= 2");
    }
    std::vector<double> x(n);
    const double l0 = std::log(x_min);
    const double dl = (std::log(x_max) - l0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::exp(l0 + dl * static_cast<double>(i));
    }
    x.front() = x_min;
    x.back() = x_max;
    return x;
}

/// n points y0 + j·period/n, j = 0..n−1 (the right end is identified with y0).
inline std::vector<double> periodic_grid(double y0, double period, std::size_t n) {
    require_positive(period, "periodic_grid: period");
    if (n < 1) {
        throw DomainError("periodic_grid: need at least one point");
    }
    std::vector<double> y(n);
    for (std::size_t j = 0; j < n; ++j) {
        y[j] = y0 + period * static_cast<double>(j) / static_cast<double>(n);
    }
    return y;
}

/// Complex samples ψ(x_i, y_j) stored row-major (x outer). The inner product
/// carries x^{weight_exponent} dx dy; x rows outside [valid_lo, valid_hi)
/// are invalid (e.g. stencil boundaries) and excluded from norms.
class GridFunction {
public:
    GridFunction(std::vector<double> x, std::vector<double> y, std::vector<std::complex<double>> values,
                 double weight_exponent, YAxis axis = YAxis::Position, std::size_t valid_lo = 0,
                 std::size_t valid_hi = std::numeric_limits<std::size_t>::max())
        : x_(std::move(x)), y_(std::move(y)), values_(std::move(values)),
          weight_exponent_(weight_exponent), axis_(axis), valid_lo_(valid_lo),
          valid_hi_(std::min(valid_hi, x_.size())) {
        if (x_.empty() || y_.empty()) {
            throw DomainError("GridFunction: empty grid");
        }
        if (!(x_.front() > 0.0)) {
            throw DomainError("GridFunction: x grid must stay away from the boundary x = 0");
        }
        for (std::size_t i = 1; i < x_.size(); ++i) {
            if (!(x_[i] > x_[i - 1])) {
                throw DomainError("GridFunction: x grid must be strictly increasing");
            }
        }
        if (y_.size() > 1) {
            const double h = y_[1] - y_[0];
            if (!(h > 0.0)) {
                throw DomainError("GridFunction: y grid must be increasing");
            }
            for (std::size_t j = 2; j < y_.size(); ++j) {
                if (std::abs((y_[j] - y_[j - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
                    throw DomainError("GridFunction: y grid must be uniform");
                }
            }
        }
        if (values_.size() != x_.size() * y_.size()) {
            throw DomainError("GridFunction: values do not match grid shape");
        }
        if (valid_lo_ > valid_hi_) {
            throw DomainError("GridFunction: empty valid range");
        }
        if (!std::isfinite(weight_exponent_)) {
            throw DomainError("GridFunction: weight exponent must be finite");
        }
        for (std::size_t i = valid_lo_; i < valid_hi_; ++i) {
            for (std::size_t j = 0; j < y_.size(); ++j) {
                const auto v = values_[i * y_.size() + j];
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                    throw DomainError("GridFunction: non-finite sample");
                }
            }
        }
    }

    template <class F>
    static GridFunction sample(std::vector<double> x, std::vector<double> y, double weight_exponent, F&& f) {
        std::vector<std::complex<double>> v;
        v.reserve(x.size() * y.size());
        for (double xi : x) {
            for (double yj : y) {
                v.emplace_back(f(xi, yj));
            }
        }
        return GridFunction(std::move(x), std::move(y), std::move(v), weight_exponent);
    }

    std::size_t nx() const noexcept { return x_.size(); }
    std::size_t ny() const noexcept { return y_.size(); }
    const std::vector<double>& x() const noexcept { return x_; }
    const std::vector<double>& y() const noexcept { return y_; }
    const std::vector<std::complex<double>>& values() const noexcept { return values_; }
    std::complex<double> at(std::size_t i, std::size_t j) const { return values_[i * y_.size() + j]; }
    double weight_exponent() const noexcept { return weight_exponent_; }
    YAxis y_axis() const noexcept { return axis_; }
    std::size_t valid_lo() const noexcept { return valid_lo_; }
    std::size_t valid_hi() const noexcept { return valid_hi_; }
    double dy() const noexcept { return y_.size() > 1 ? y_[1] - y_[0] : 1.0; }

    /// Discrete weighted L² norm over valid rows: trapezoid in x, rectangle
    /// rule in y (exact for trigonometric polynomials on a periodic grid).
    double norm() const {
        const auto w = fd::trapezoid_weights(x_, valid_lo_, valid_hi_);
        double acc = 0.0;
        for (std::size_t i = valid_lo_; i < valid_hi_; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < y_.size(); ++j) {
                row += std::norm(values_[i * y_.size() + j]);
            }
            acc += w[i] * std::pow(x_[i], weight_exponent_) * row;
        }
        return std::sqrt(acc * dy());
    }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<std::complex<double>> values_;
    double weight_exponent_;
    YAxis axis_;
    std::size_t valid_lo_;
    std::size_t valid_hi_;
};

/// The pointwise difference a − b on the rows valid in both.
inline GridFunction difference(const GridFunction& a, const GridFunction& b) {
    if (a.x() != b.x() || a.y() != b.y() || a.weight_exponent() != b.weight_exponent() ||
        a.y_axis() != b.y_axis()) {
        throw DomainError("difference: grid functions are not on the same grid");
    }
    std::vector<std::complex<double>> v(a.values().size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = a.values()[k] - b.values()[k];
    }
    const std::size_t lo = std::max(a.valid_lo(), b.valid_lo());
    const std::size_t hi = std::min(a.valid_hi(), b.valid_hi());
    return {a.x(), a.y(), std::move(v), a.weight_exponent(), a.y_axis(), lo, std::max(lo, hi)};
}

// ---------------------------------------------------------------------------
// Δ_α, U_α, F₂
// ---------------------------------------------------------------------------

/// Δ_α ψ = ∂²_xψ + x^{2α}∂²_yψ − (α/x)∂_xψ by second-order central
/// differences (periodic in y). The first and last x rows become invalid.
inline GridFunction apply_laplace_beltrami(const GridFunction& psi, const GrushinModel& m) {
    if (psi.y_axis() != YAxis::Position) {
        throw DomainError("apply_laplace_beltrami: input must be in position space");
    }
    if (psi.weight_exponent() != -m.alpha) {
        throw DomainError("apply_laplace_beltrami: input must live in L^2(x^-alpha dx dy)");
    }
    const std::size_t nx = psi.nx();
    const std::size_t ny = psi.ny();
    if (nx < 5 || ny < 5) {
        throw GridTooCoarse("apply_laplace_beltrami: need at least 5 points per axis");
    }
    const auto& x = psi.x();
    const double hy2 = psi.dy() * psi.dy();
    std::vector<std::complex<double>> out(nx * ny, {0.0, 0.0});
    std::vector<std::complex<double>> column(nx);
    const std::size_t lo = std::max<std::size_t>(psi.valid_lo(), 1);
    const std::size_t hi = std::min(psi.valid_hi(), nx - 1);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            column[i] = psi.at(i, j);
        }
        const std::span<const std::complex<double>> c(column);
        const std::size_t jp = (j + 1) % ny;
        const std::size_t jm = (j + ny - 1) % ny;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto dyy = (psi.at(i, jp) - 2.0 * psi.at(i, j) + psi.at(i, jm)) / hy2;
            out[i * ny + j] = fd::second_derivative(std::span<const double>(x), c, i) +
                              std::pow(x[i], 2.0 * m.alpha) * dyy -
                              (m.alpha / x[i]) * fd::first_derivative(std::span<const double>(x), c, i);
        }
    }
    return {x, psi.y(), std::move(out), psi.weight_exponent(), YAxis::Position, lo, std::max(lo, hi)};
}

enum class GaugeDirection { Forward, Inverse };

/// Forward: ψ ↦ x^{−α/2}ψ from L²(x^{−α}dx dy) to L²(dx dy). Inverse undoes it.
inline GridFunction gauge_transform(const GridFunction& psi, const GrushinModel& m, GaugeDirection dir) {
    const double from = dir == GaugeDirection::Forward ? -m.alpha : 0.0;
    const double to = dir == GaugeDirection::Forward ? 0.0 : -m.alpha;
    if (psi.weight_exponent() != from) {
        throw DomainError("gauge_transform: weight exponent inconsistent with direction");
    }
    const double shift = dir == GaugeDirection::Forward ? -0.5 * m.alpha : 0.5 * m.alpha;
    std::vector<std::complex<double>> v(psi.values().size());
    for (std::size_t i = 0; i < psi.nx(); ++i) {
        const double f = std::pow(psi.x()[i], shift);
        for (std::size_t j = 0; j < psi.ny(); ++j) {
            v[i * psi.ny() + j] = f * psi.at(i, j);
        }
    }
    return {psi.x(), psi.y(), std::move(v), to, psi.y_axis(), psi.valid_lo(), psi.valid_hi()};
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

/// Unitary Fourier transform in y, normalised to approximate
/// (2π)^{−1/2}∫ψ(x,y)e^{−iξy}dy. Modes are returned in ascending order:
/// ξ_k = 2πk/(n·Δy) on the plane (a periodised window), integer k on the
/// cylinder, whose y grid must have period 2π.
inline GridFunction fourier_y(const GridFunction& psi, const GrushinModel& m) {
    if (psi.y_axis() != YAxis::Position) {
        throw DomainError("fourier_y: input is already in mode space");
    }
    const std::size_t nx = psi.nx();
    const std::size_t ny = psi.ny();
    const double hy = psi.dy();
    const double period = hy * static_cast<double>(ny);
    if (m.topology == Topology::Cylinder &&
        std::abs(period - 2.0 * std::numbers::pi) > 1e-12 * 2.0 * std::numbers::pi) {
        throw DomainError("fourier_y: cylinder y grid must cover one period of length 2*pi");
    }

    std::vector<std::complex<double>> data = psi.values();
    std::vector<std::complex<double>> spec(nx * ny);
    {
        const int n = static_cast<int>(ny);
        fftw_plan plan;
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            plan = fftw_plan_many_dft(1, &n, static_cast<int>(nx),
                                      reinterpret_cast<fftw_complex*>(data.data()), nullptr, 1, n,
                                      reinterpret_cast<fftw_complex*>(spec.data()), nullptr, 1, n,
                                      FFTW_FORWARD, FFTW_ESTIMATE);
        }
        fftw_execute(plan);
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    const long half = static_cast<long>(ny) / 2;
    const long k_min = -half;
    const double dxi = 2.0 * std::numbers::pi / period;
    const double y0 = psi.y().front();
    const double scale = hy / std::sqrt(2.0 * std::numbers::pi);
    std::vector<double> modes(ny);
    std::vector<std::complex<double>> out(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        const long k = k_min + static_cast<long>(j);
        const std::size_t src = static_cast<std::size_t>((k + static_cast<long>(ny)) % static_cast<long>(ny));
        const double xi = m.topology == Topology::Cylinder ? static_cast<double>(k) : dxi * static_cast<double>(k);
        modes[j] = xi;
        const std::complex<double> phase = scale * std::polar(1.0, -xi * y0);
        for (std::size_t i = 0; i < nx; ++i) {
            out[i * ny + j] = phase * spec[i * ny + src];
        }
    }
    return {psi.x(), std::move(modes), std::move(out), psi.weight_exponent(), YAxis::Mode,
            psi.valid_lo(), psi.valid_hi()};
}

/// How the fiber side of the intertwining check represents −∂²_y.
enum class ModeSymbol {
    /// ξ², the symbol of the continuum operator A_α(ξ).
    Continuum,
    /// (4/Δy²)·sin²(ξΔy/2), the symbol of the periodic three-point stencil.
    DiscreteStencil,
};

struct IntertwiningOptions {
    ModeSymbol symbol = ModeSymbol::Continuum;
};

/// ‖F₂U_αΔ_αψ − A_α F₂U_αψ‖ in L²(dx dξ) on the discrete grid, where A_α
/// acts on each mode column as ∂²_x + V_{α,ξ}.
inline double intertwining_residual(const GrushinModel& m, const GridFunction& psi,
                                    const IntertwiningOptions& opt = {}) {
    if (psi.nx() < 5 || psi.ny() < 5) {
        throw GridTooCoarse("intertwining_residual: need at least 5 points per axis");
    }
    const GridFunction lhs =
        fourier_y(gauge_transform(apply_laplace_beltrami(psi, m), m, GaugeDirection::Forward), m);
    const GridFunction reduced = fourier_y(gauge_transform(psi, m, GaugeDirection::Forward), m);

    const std::size_t nx = reduced.nx();
    const std::size_t ny = reduced.ny();
    const auto& x = reduced.x();
    const double hy = psi.dy();
    std::vector<std::complex<double>> rhs(nx * ny, {0.0, 0.0});
    std::vector<std::complex<double>> column(nx);
    const std::size_t lo = std::max<std::size_t>(reduced.valid_lo(), 1);
    const std::size_t hi = std::min(reduced.valid_hi(), nx - 1);
    for (std::size_t j = 0; j < ny; ++j) {
        const double xi = reduced.y()[j];
        double xi2 = xi * xi;
        if (opt.symbol == ModeSymbol::DiscreteStencil) {
            const double s = std::sin(0.5 * xi * hy);
            xi2 = 4.0 * s * s / (hy * hy);
        }
        for (std::size_t i = 0; i < nx; ++i) {
            column[i] = reduced.at(i, j);
        }
        const std::span<const std::complex<double>> c(column);
        for (std::size_t i = lo; i < hi; ++i) {
            // V_{α,ξ} with ξ² replaced by the chosen symbol.
            const double v = fiber::detail::potential_value(m.alpha, 0.0, x[i]) -
                             xi2 * std::pow(x[i], 2.0 * m.alpha);
            rhs[i * ny + j] = fd::second_derivative(std::span<const double>(x), c, i) + v * column[i];
        }
    }
    const GridFunction rhs_gf(x, reduced.y(), std::move(rhs), 0.0, YAxis::Mode, lo, std::max(lo, hi));
    return difference(lhs, rhs_gf).norm();
}

}  // namespace grushin::geometry

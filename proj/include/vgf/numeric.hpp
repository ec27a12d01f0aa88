#ifndef VGF_NUMERIC_HPP
#define VGF_NUMERIC_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vgf {

/// Uniformly spaced samples of [a, b] with n nodes (n >= 2).
std::vector<double> linspace(double a, double b, std::size_t n);

/// Trapezoidal rule on uniformly spaced samples.
double trapz(std::span<const double> values, double dx);

/// Cumulative trapezoidal integral, result[0] = 0.
std::vector<double> cumtrapz(std::span<const double> values, double dx);

/// Cumulative integral by composite Simpson over node pairs with the
/// midpoint supplied by `mid(i)` for interval i. result[0] = 0.
template <typename NodeFn, typename MidFn>
std::vector<double> cumsimpson(std::size_t n, double dx, NodeFn node, MidFn mid) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        out[i + 1] = out[i] + dx / 6.0 * (node(i) + 4.0 * mid(i) + node(i + 1));
    }
    return out;
}

/// Thomas algorithm for a tridiagonal system. `lower` and `upper` have
/// size n-1, `diag` and `rhs` size n. Returns the solution.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs);

/// Second-order one-sided first derivative at the left end of a uniform grid.
inline double gradient_left3(std::span<const double> f, double dx) {
    if (f.size() < 3) throw std::invalid_argument("gradient_left3: need >= 3 nodes");
    return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
}

/// Second-order one-sided first derivative at the right end of a uniform grid.
inline double gradient_right3(std::span<const double> f, double dx) {
    if (f.size() < 3) throw std::invalid_argument("gradient_right3: need >= 3 nodes");
    const std::size_t n = f.size();
    return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
}

/// Piecewise-cubic (Catmull-Rom) interpolation on a uniform grid.
/// Falls back to one-sided slopes at the boundary intervals. Evaluations
/// outside [x0, x0 + (n-1) dx] clamp to the end intervals.
double interp_cubic_uniform(double x0, double dx, std::span<const double> values, double x);

/// Linear interpolation on a uniform grid, clamped at the ends.
double interp_linear_uniform(double x0, double dx, std::span<const double> values, double x);

/// Resample `values` given on a uniform grid of `src_n` nodes over [0,1]
/// onto a uniform grid of `dst_n` nodes over [0,1] (cubic).
std::vector<double> resample_unit_grid(std::span<const double> values, std::size_t dst_n);

/// Composite Gauss-Legendre quadrature of f over [a, b] with `panels`
/// panels of a fixed 10-point rule.
template <typename F>
double gauss_legendre(F&& f, double a, double b, int panels = 16) {
    // 10-point Gauss-Legendre nodes/weights on [-1, 1].
    static const double xg[5] = {0.1488743389816312, 0.4333953941292472,
                                 0.6794095682990244, 0.8650633666889845,
                                 0.9739065285171717};
    static const double wg[5] = {0.2955242247147529, 0.2692667193099963,
                                 0.2190863625159820, 0.1494513491505806,
                                 0.0666713443086881};
    if (b == a) return 0.0;
    const double hp = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double c = a + (p + 0.5) * hp;
        const double h2 = 0.5 * hp;
        for (int k = 0; k < 5; ++k) {
            sum += wg[k] * (f(c + h2 * xg[k]) + f(c - h2 * xg[k]));
        }
    }
    return sum * 0.5 * hp;
}

/// 64-bit FNV-1a hash, used to tie artifacts to the producing config.
std::uint64_t fnv1a64(std::span<const char> data);

}  // namespace vgf

#endif

#include "vgf/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace vgf {

std::vector<double> linspace(double a, double b, std::size_t n) {
    if (n < 2) throw std::invalid_argument("linspace: need n >= 2");
    std::vector<double> out(n);
    const double dx = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + dx * static_cast<double>(i);
    out.back() = b;
    return out;
}

double trapz(std::span<const double> values, double dx) {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * dx;
}

std::vector<double> cumtrapz(std::span<const double> values, double dx) {
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t i = 1; i < values.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * dx * (values[i - 1] + values[i]);
    }
    return out;
}

std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (rhs.size() != n || lower.size() != n - 1 || upper.size() != n - 1) {
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    }
    std::vector<double> c(n - 1), d(n);
    double beta = diag[0];
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i - 1];
        if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

namespace {

double hermite(double f0, double f1, double m0, double m1, double s) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * m0 +
           (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * m1;
}

}  // namespace

double interp_cubic_uniform(double x0, double dx, std::span<const double> values, double x) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("interp_cubic_uniform: need >= 2 nodes");
    double u = (x - x0) / dx;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    std::size_t i = std::min(static_cast<std::size_t>(u), n - 2);
    const double s = u - static_cast<double>(i);
    const double f0 = values[i], f1 = values[i + 1];
    // slopes scaled to the unit interval
    const double m0 = (i == 0) ? (values[1] - values[0])
                               : 0.5 * (values[i + 1] - values[i - 1]);
    const double m1 = (i + 2 >= n) ? (values[n - 1] - values[n - 2])
                                   : 0.5 * (values[i + 2] - values[i]);
    return hermite(f0, f1, m0, m1, s);
}

double interp_linear_uniform(double x0, double dx, std::span<const double> values, double x) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("interp_linear_uniform: need >= 2 nodes");
    double u = (x - x0) / dx;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    std::size_t i = std::min(static_cast<std::size_t>(u), n - 2);
    const double s = u - static_cast<double>(i);
    return (1.0 - s) * values[i] + s * values[i + 1];
}

std::vector<double> resample_unit_grid(std::span<const double> values, std::size_t dst_n) {
    std::vector<double> out(dst_n);
    const double src_dx = 1.0 / static_cast<double>(values.size() - 1);
    for (std::size_t i = 0; i < dst_n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(dst_n - 1);
        out[i] = interp_cubic_uniform(0.0, src_dx, values, x);
    }
    return out;
}

std::uint64_t fnv1a64(std::span<const char> data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace vgf

#ifndef VGF_LINEARIZATION_HPP
#define VGF_LINEARIZATION_HPP

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

#include "vgf/physics.hpp"
#include "vgf/reference.hpp"

namespace vgf {

/// All time-varying coefficients of the reference linearization, tabulated
/// on the bundle's (sigma, t) grid. Phase arrays are indexed [phase-1],
/// fields row-major [t][sigma].
struct LinearizedCoefficients {
    std::vector<double> t_grid, sigma_grid;

    // fields on (sigma, t)
    std::array<std::vector<double>, 2> psi, dpsi_dt, f, g, r;
    // scalars per t
    std::array<std::vector<double>, 2> lambda, dlambda_dt, q, p, s_hat;
    std::vector<double> d;

    std::size_t n_t() const { return t_grid.size(); }
    std::size_t n_sigma() const { return sigma_grid.size(); }
    double dsigma() const { return sigma_grid[1] - sigma_grid[0]; }
    double dt() const { return t_grid[1] - t_grid[0]; }
    std::size_t idx(std::size_t it, std::size_t is) const { return it * n_sigma() + is; }

    /// c_{i,j}(sigma, t) = g_i(sigma, t) s_hat_j(t), on grid nodes.
    double c(int i, int j, std::size_t it, std::size_t is) const {
        return g[i - 1][idx(it, is)] * s_hat[j - 1][it];
    }
};

/// Hopf-Cole transformation factors h_i and the checked coefficients of the
/// convection-free system.
struct HopfColeFactors {
    std::vector<double> t_grid, sigma_grid;

    std::array<std::vector<double>, 2> h, dh_dsigma, d2h_dsigma2, dh_dt;  // (sigma, t)
    std::array<std::vector<double>, 2> a_check, r_check;                  // (sigma, t)
    std::array<std::array<std::vector<double>, 2>, 2> c_check;            // [i][j] (sigma, t)
    std::array<std::vector<double>, 2> b_check, q_check, p_check;         // per t

    std::size_t n_t() const { return t_grid.size(); }
    std::size_t n_sigma() const { return sigma_grid.size(); }
    std::size_t idx(std::size_t it, std::size_t is) const { return it * n_sigma() + is; }
    double dt() const { return t_grid[1] - t_grid[0]; }

    /// Hopf-Cole column h_i(., t) at an arbitrary time (linear in t).
    std::vector<double> h_column(int phase, double t) const;
};

/// The coefficient matrices of the extended PDE-ODE error system, queryable
/// at arbitrary (sigma, t) via linear interpolation in t and cubic in sigma.
struct ExtendedSystemMatrices {
    std::vector<double> t_grid, sigma_grid;

    // per-t scalar tables
    std::array<std::vector<double>, 2> lambda, b_check, q_check, p_check, s_hat;
    std::vector<double> d;
    // (sigma, t) tables
    std::array<std::vector<double>, 2> a_check, r_check;
    std::array<std::array<std::vector<double>, 2>, 2> c_check;

    std::size_t n_t() const { return t_grid.size(); }
    std::size_t n_sigma() const { return sigma_grid.size(); }
    double dt() const { return t_grid[1] - t_grid[0]; }
    double dsigma() const { return sigma_grid[1] - sigma_grid[0]; }
    std::size_t idx(std::size_t it, std::size_t is) const { return it * n_sigma() + is; }

    Eigen::Matrix2d F(double t) const;       // diag(d, 0)
    Eigen::Matrix2d S(double t) const;       // [[s1, s2], [1, 0]]
    Eigen::Matrix2d B(double t) const;       // diag(b_check)
    Eigen::Matrix2d P(double t) const;       // [[p_check_1, 0], [p_check_2, 0]]
    Eigen::Matrix2d Q(double t) const;       // diag(q_check)
    Eigen::Matrix2d Lambda(double t) const;  // diag(lambda)
    Eigen::Matrix2d A(double sigma, double t) const;  // diag(a_check)
    Eigen::Matrix2d C(double sigma, double t) const;
    Eigen::Matrix2d R(double sigma, double t) const;  // [[r1, 0], [r2, 0]]

    /// Ordering probe (Remark-1 check): +1 if lambda_1 > lambda_2 at sample
    /// it, -1 if lambda_1 < lambda_2, 0 if equal to within 1e-6 relative.
    int lambda_ordering(std::size_t it) const;

  private:
    double scalar(const std::vector<double>& series, double t) const;
    double field(const std::vector<double>& table, double sigma, double t) const;
};

LinearizedCoefficients assemble_coefficients(const ReferenceBundle& bundle,
                                             const MaterialParams& params,
                                             const GeometryParams& geometry);

HopfColeFactors hopf_cole(const LinearizedCoefficients& coeffs);

ExtendedSystemMatrices assemble_extended(const HopfColeFactors& hc,
                                         const LinearizedCoefficients& coeffs);

}  // namespace vgf

#endif

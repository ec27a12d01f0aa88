#ifndef VGF_DECOUPLING_HPP
#define VGF_DECOUPLING_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "vgf/linearization.hpp"

namespace vgf {

/// Fit sampled values on a uniform grid over [0,1] with a degree-`degree`
/// polynomial (least squares in a Chebyshev basis) and return the monomial
/// coefficients c_0..c_degree so that p(x) = sum c_j x^j.
std::vector<double> polyfit_unit_grid(std::span<const double> values, int degree);

/// ODE feedback gain K(t) rendering the decoupled ODE time-invariant:
/// F(t) - S(t) K(t) = F_bar.
struct OdeGain {
    Eigen::Matrix2d F_bar;
    std::vector<double> t_grid;
    std::vector<Eigen::Matrix2d> K;  // per t sample

    Eigen::Matrix2d K_at(double t) const;  // linear interpolation
};

OdeGain choose_gain(const ExtendedSystemMatrices& matrices, const Eigen::Matrix2d& F_bar);

/// Truncated power series N(sigma, t) = sum_j L_j(t) sigma^j / j! solving the
/// decoupling equations, plus the derived boundary matrices.
struct DecouplingSolution {
    std::vector<double> t_grid;
    int truncation = 0;
    Eigen::Matrix2d F_bar;
    std::vector<std::vector<Eigen::Matrix2d>> L;  // [j][t sample]

    Eigen::Matrix2d L_at(int j, double t) const;
    Eigen::Matrix2d N(double sigma, double t) const;
    Eigen::Matrix2d dN_dsigma(double sigma, double t) const;

    /// C_bar = C - N S  (coupling left after decoupling)
    Eigen::Matrix2d C_bar(const ExtendedSystemMatrices& m, double sigma, double t) const;
    /// P_bar = P + B N(1,.) - dN_dsigma(1,.)
    Eigen::Matrix2d P_bar(const ExtendedSystemMatrices& m, double t) const;
};

/// Solve the decoupling equations by the sigma power-series recursion with
/// finite-difference time derivatives of the coefficients.
DecouplingSolution solve_decoupling(const ExtendedSystemMatrices& matrices, const OdeGain& gain,
                                    int truncation);

/// w_tilde(sigma_k) = w(sigma_k) - N(sigma_k, t) x on a uniform sigma grid.
/// Each entry of `w` holds the 2-vector at one node.
std::vector<Eigen::Vector2d> apply_decoupling(const std::vector<Eigen::Vector2d>& w,
                                              const Eigen::Vector2d& x,
                                              const DecouplingSolution& sol, double t);
std::vector<Eigen::Vector2d> invert_decoupling(const std::vector<Eigen::Vector2d>& w_tilde,
                                               const Eigen::Vector2d& x,
                                               const DecouplingSolution& sol, double t);

}  // namespace vgf

#endif

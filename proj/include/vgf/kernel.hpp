#ifndef VGF_KERNEL_HPP
#define VGF_KERNEL_HPP

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

#include "vgf/decoupling.hpp"
#include "vgf/linearization.hpp"

namespace vgf {

/// Which elements of the kernel receive the boundary condition at zeta = 0.
/// Triangular: diagonal elements are constrained there as well, so the
/// residual coupling matrix D keeps only the entry whose characteristic
/// ordering forbids the constraint. Literal: only strictly faster rows are
/// constrained and D picks up diagonal entries too.
enum class KernelBcMode { Triangular, Literal };

struct TargetParams {
    std::array<double, 2> mu = {3e-4, 3e-4};  ///< target damping [1/s]
    KernelBcMode bc_mode = KernelBcMode::Triangular;
    int lattice_factor = 4;        ///< characteristic lattice nodes per sigma cell
    int max_sweeps = 200;          ///< successive-approximation sweeps per solve
    double sweep_tol = 1e-12;      ///< sup-norm stop for the inner iteration
    double coupling_tol = 1e-10;   ///< sup-norm stop for the boundary-data loop
    int max_coupling_iters = 50;

    Eigen::Matrix2d M() const {
        Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
        m(0, 0) = mu[0];
        m(1, 1) = mu[1];
        return m;
    }
};

/// Backstepping kernel at one snapshot time, on the triangle
/// 0 <= zeta <= sigma <= 1, plus the traces the control law consumes.
/// Elements are stored channel-wise with e = 2*(i-1) + (j-1).
struct KernelSnapshot {
    double t_k = 0.0;
    std::vector<double> sigma_grid;

    std::array<std::vector<double>, 4> K_tri;        ///< packed rows, entry (is, iz), iz <= is
    std::array<std::vector<double>, 4> dK1_dsigma;   ///< d/dsigma K(1, zeta) per zeta node
    Eigen::Matrix2d K11 = Eigen::Matrix2d::Zero();   ///< K(1, 1)
    std::array<std::vector<double>, 4> K_diag;       ///< K(sigma, sigma)
    std::array<std::vector<double>, 4> D;            ///< residual coupling D(sigma)

    std::array<double, 2> lambda = {0.0, 0.0};
    /// Discontinuity ray zeta = jump_slope[e] * sigma of element e (piecewise
    /// classical solution); < 0 when the element is continuous.
    std::array<double, 4> jump_slope = {-1.0, -1.0, -1.0, -1.0};

    std::size_t n_sigma() const { return sigma_grid.size(); }
    double dsigma() const { return sigma_grid[1] - sigma_grid[0]; }
    std::size_t tri_idx(std::size_t is, std::size_t iz) const { return is * (is + 1) / 2 + iz; }
    Eigen::Matrix2d K_at(std::size_t is, std::size_t iz) const;

    /// Jump-aware trapezoid of sum_j K_ij(sigma_is, zeta) f_j(zeta) over
    /// [0, sigma_is], row i of the Volterra term.
    Eigen::Vector2d row_integral(std::size_t is, const std::vector<Eigen::Vector2d>& f) const;
};

/// Solve the quasistatic kernel equations (time derivative dropped) at time t.
KernelSnapshot solve_kernel_quasistatic(const ExtendedSystemMatrices& matrices,
                                        const DecouplingSolution& dec, const TargetParams& target,
                                        double t, std::size_t n_sigma);

/// Snapshots at equidistant times with linear interpolation between them.
struct KernelSet {
    std::vector<KernelSnapshot> snapshots;

    KernelSnapshot interpolate(double t) const;
};

KernelSet build_kernel_set(const ExtendedSystemMatrices& matrices, const DecouplingSolution& dec,
                           const TargetParams& target, std::size_t n_snapshots,
                           std::size_t n_sigma);

/// Volterra transformation w_target(sigma) = w(sigma) - int_0^sigma K w dzeta
/// on the snapshot's sigma grid, and its exact discrete inverse.
std::vector<Eigen::Vector2d> transform_backstepping(const std::vector<Eigen::Vector2d>& w,
                                                    const KernelSnapshot& snap);
std::vector<Eigen::Vector2d> invert_backstepping(const std::vector<Eigen::Vector2d>& w_target,
                                                 const KernelSnapshot& snap);

}  // namespace vgf

#endif

#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "vgf/numeric.hpp"

namespace vgf::testing {

MovingGridSolver::MovingGridSolver(const MaterialParams& params, const GeometryParams& geometry,
                                   std::size_t nodes_per_phase)
    : params_(params), geometry_(geometry), n_(nodes_per_phase) {
    if (n_ < 5) throw std::invalid_argument("MovingGridSolver: need >= 5 nodes per phase");
    T_1_.assign(n_, params_.T_m);
    T_2_.assign(n_, params_.T_m);
}

void MovingGridSolver::init_from(const PlantState& state) {
    gamma_ = state.interface.gamma;
    gamma_dot_ = state.interface.gamma_dot;
    geometry_.require_admissible(gamma_);
    // Phase fields live on sigma in [0,1] with node 0 at the interface; the z
    // grids put the interface at the crystal's last node and the melt's first.
    for (std::size_t j = 0; j < n_; ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(n_ - 1);
        const double z1 = geometry_.Gamma_1 + frac * (gamma_ - geometry_.Gamma_1);
        const double z2 = gamma_ + frac * (geometry_.Gamma_2 - gamma_);
        const double sigma1 = front_fix_map(z1, gamma_, 1, geometry_);
        const double sigma2 = front_fix_map(z2, gamma_, 2, geometry_);
        const auto& f1 = state.field_1.values;
        const auto& f2 = state.field_2.values;
        T_1_[j] = interp_cubic_uniform(0.0, state.field_1.dsigma(), f1, sigma1);
        T_2_[j] = interp_cubic_uniform(0.0, state.field_2.dsigma(), f2, sigma2);
    }
    T_1_[n_ - 1] = params_.T_m;
    T_2_[0] = params_.T_m;
}

void MovingGridSolver::step(double u_1, double u_2, double dt) {
    const double dz1 = (gamma_ - geometry_.Gamma_1) / static_cast<double>(n_ - 1);
    const double dz2 = (geometry_.Gamma_2 - gamma_) / static_cast<double>(n_ - 1);

    // Interface gradients in z (one-sided, second order) drive the front.
    const double g1 = gradient_right3(T_1_, dz1);
    const double g2 = gradient_left3(T_2_, dz2);
    gamma_dot_ = stefan_velocity(g1, g2, params_);

    // Diffuse on the frozen grids; in physical coordinates the bulk equation
    // is plain heat conduction, all front motion enters through the regrid.
    std::vector<double> new1 = T_1_, new2 = T_2_;
    const double r1 = params_.alpha_1 * dt / (dz1 * dz1);
    const double r2 = params_.alpha_2 * dt / (dz2 * dz2);
    if (r1 > 0.5 || r2 > 0.5) throw std::invalid_argument("MovingGridSolver: dt unstable");
    for (std::size_t j = 1; j + 1 < n_; ++j) {
        new1[j] += r1 * (T_1_[j + 1] - 2.0 * T_1_[j] + T_1_[j - 1]);
        new2[j] += r2 * (T_2_[j + 1] - 2.0 * T_2_[j] + T_2_[j - 1]);
    }
    // Neumann flux boundaries via ghost nodes: dT/dz = beta u / k at Gamma_i.
    const double bc1 = geometry_.beta_1 * u_1 / params_.k_1;
    const double bc2 = geometry_.beta_2 * u_2 / params_.k_2;
    new1[0] += r1 * (2.0 * T_1_[1] - 2.0 * T_1_[0] - 2.0 * dz1 * bc1);
    new2[n_ - 1] += r2 * (2.0 * T_2_[n_ - 2] - 2.0 * T_2_[n_ - 1] + 2.0 * dz2 * bc2);
    new1[n_ - 1] = params_.T_m;
    new2[0] = params_.T_m;

    // Move the front and resample both fields onto the shifted grids. The
    // per-step displacement is far below dz, so cubic regridding error is
    // negligible; the interface node is re-pinned to T_m exactly.
    const double gamma_new = gamma_ + dt * gamma_dot_;
    geometry_.require_admissible(gamma_new);
    const double dz1n = (gamma_new - geometry_.Gamma_1) / static_cast<double>(n_ - 1);
    const double dz2n = (geometry_.Gamma_2 - gamma_new) / static_cast<double>(n_ - 1);
    for (std::size_t j = 0; j < n_; ++j) {
        const double z1 = geometry_.Gamma_1 + static_cast<double>(j) * dz1n;
        const double z2 = gamma_new + static_cast<double>(j) * dz2n;
        T_1_[j] = interp_cubic_uniform(geometry_.Gamma_1, dz1, new1, z1);
        T_2_[j] = interp_cubic_uniform(gamma_, dz2, new2, z2);
    }
    T_1_[n_ - 1] = params_.T_m;
    T_2_[0] = params_.T_m;
    gamma_ = gamma_new;
}

double MovingGridSolver::sample(int phase, double z) const {
    if (phase == 1) {
        const double dz = (gamma_ - geometry_.Gamma_1) / static_cast<double>(n_ - 1);
        return interp_cubic_uniform(geometry_.Gamma_1, dz, T_1_, z);
    }
    const double dz = (geometry_.Gamma_2 - gamma_) / static_cast<double>(n_ - 1);
    return interp_cubic_uniform(gamma_, dz, T_2_, z);
}

double scalar_kernel_bessel(double x, double y, double a_plus_mu, double lambda) {
    const double c = a_plus_mu / lambda;
    const double arg2 = c * (x * x - y * y);
    if (std::abs(arg2) < 1e-14) return -0.5 * c * y;  // I_1(s)/s -> 1/2 as s -> 0
    if (arg2 > 0.0) {
        const double s = std::sqrt(arg2);
        return -c * y * std::cyl_bessel_i(1.0, s) / s;
    }
    const double s = std::sqrt(-arg2);  // oscillatory branch: I_1(is)/(is) = J_1(s)/s
    return -c * y * std::cyl_bessel_j(1.0, s) / s;
}

}  // namespace vgf::testing

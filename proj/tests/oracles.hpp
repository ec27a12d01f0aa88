#ifndef VGF_TESTS_ORACLES_HPP
#define VGF_TESTS_ORACLES_HPP

#include <cstddef>
#include <vector>

#include "vgf/physics.hpp"

namespace vgf::testing {

/// Independent reference solver for the two-phase Stefan problem, used to
/// cross-check the front-fixed production stepper. Works directly in the
/// physical z coordinate: explicit Euler diffusion on per-phase uniform
/// grids, interface velocity from the Stefan condition, and cubic regridding
/// after every step as the interface moves.
///
/// Phase 1 nodes run from Gamma_1 to gamma (last node = interface), phase 2
/// nodes from gamma to Gamma_2 (first node = interface).
class MovingGridSolver {
  public:
    MovingGridSolver(const MaterialParams& params, const GeometryParams& geometry,
                     std::size_t nodes_per_phase);

    /// Sample a fixed-domain plant state onto the z grids.
    void init_from(const PlantState& state);

    void step(double u_1, double u_2, double dt);

    double gamma() const { return gamma_; }
    double gamma_dot() const { return gamma_dot_; }
    /// Cubic interpolation of the phase field at physical position z.
    double sample(int phase, double z) const;

  private:
    MaterialParams params_;
    GeometryParams geometry_;
    std::size_t n_;
    std::vector<double> T_1_, T_2_;
    double gamma_ = 0.0;
    double gamma_dot_ = 0.0;
};

/// Closed-form backstepping kernel for one constant-coefficient scalar heat
/// equation with Dirichlet base (k(x,0) = 0):
///   k(x,y) = -c y I_1(s)/s,  s = sqrt(c (x^2 - y^2)),  c = (a + mu)/lambda,
/// which satisfies k_xx - k_yy = c k and k(x,x) = -c x / 2.
double scalar_kernel_bessel(double x, double y, double a_plus_mu, double lambda);

}  // namespace vgf::testing

#endif

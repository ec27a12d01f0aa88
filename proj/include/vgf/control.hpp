#ifndef VGF_CONTROL_HPP
#define VGF_CONTROL_HPP

#include <Eigen/Dense>
#include <vector>

#include "vgf/decoupling.hpp"
#include "vgf/kernel.hpp"
#include "vgf/linearization.hpp"
#include "vgf/physics.hpp"
#include "vgf/reference.hpp"

namespace vgf {

/// Integrator state of the dynamic feedback; epsilon integrates the
/// fixed-domain crystal gradient error at sigma = 0 trapezoidally.
struct ControllerState {
    double epsilon = 0.0;
    double prev_rate = 0.0;
    bool has_prev = false;
};

struct ControlOutput {
    double u_1 = 0.0, u_2 = 0.0;  ///< heater fluxes [W/m^2]
    Eigen::Vector2d u_e = Eigen::Vector2d::Zero();
    Eigen::Vector2d integral_term = Eigen::Vector2d::Zero();
    Eigen::Vector2d boundary_term = Eigen::Vector2d::Zero();
    Eigen::Vector2d ode_term = Eigen::Vector2d::Zero();
};

struct ErrorPipelineResult {
    std::vector<Eigen::Vector2d> w_tilde_dec;  ///< decoupled error field per sigma node
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    double grad_error_at_0 = 0.0;
};

/// Front-fixed tracking error -> Hopf-Cole -> decoupled coordinates.
/// Plant fields are resampled (cubic) onto the controller grid when the node
/// counts differ.
ErrorPipelineResult error_pipeline(const PlantState& plant, const ReferenceBundle& bundle,
                                   const HopfColeFactors& hc, const DecouplingSolution& dec,
                                   const ControllerState& ctrl, double t);

ControlOutput control_law(const std::vector<Eigen::Vector2d>& w_tilde_dec,
                          const Eigen::Vector2d& x, double t, const KernelSet& kernels,
                          const ExtendedSystemMatrices& matrices, const DecouplingSolution& dec,
                          const ReferenceBundle& bundle);

ControllerState integrator_step(const ControllerState& ctrl, double grad_error_at_0, double dt);

}  // namespace vgf

#endif

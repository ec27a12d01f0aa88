#ifndef VGF_SIM_HPP
#define VGF_SIM_HPP

#include <cstddef>
#include <vector>

#include "vgf/control.hpp"
#include "vgf/decoupling.hpp"
#include "vgf/kernel.hpp"
#include "vgf/linearization.hpp"
#include "vgf/physics.hpp"
#include "vgf/reference.hpp"

namespace vgf {

struct SimConfig {
    std::size_t elements_per_phase = 64;
    double dt_plant = 1.0;          ///< [s]
    double dt_controller = 10.0;    ///< [s], integer multiple of dt_plant
    double duration = 30.0 * 3600;  ///< [s]
    double snapshot_interval = 300.0;

    // initial perturbations applied to the reference state
    double delta_gamma_0 = 0.0;      ///< [m]
    double delta_gamma_dot_0 = 0.0;  ///< [m/s], realized through the melt gradient
    double delta_grad_0 = 0.0;       ///< [K/m] on the crystal gradient

    void validate() const;
};

struct TrajectoryLog {
    // per controller step
    std::vector<double> t, gamma, gamma_dot, gamma_ref;
    std::vector<double> grad_1, grad_1_ref;  ///< dz T_1 at the interface [K/m]
    std::vector<double> u_1, u_2, u_1_ref, u_2_ref;
    std::vector<double> epsilon, x_gamma;

    // field snapshots (fixed-domain temperatures on the plant grid)
    std::vector<double> snapshot_t;
    std::vector<std::vector<double>> snapshot_T1, snapshot_T2;

    std::size_t steps() const { return t.size(); }
};

struct RunMetrics {
    double settling_time = -1.0;  ///< [s], -1 when the bounds never hold permanently
    double undershoot = 0.0;      ///< min gradient error [K/m]
    double max_abs_dgamma = 0.0;  ///< [m]
    double final_dgamma = 0.0;    ///< [m]
    double max_field_error = 0.0; ///< [K], over snapshots
};

/// Bundle of precomputed artifacts a simulation consumes. Feedforward runs
/// only need params/geometry/bundle; the rest may stay null.
struct ScenarioArtifacts {
    const MaterialParams* params = nullptr;
    const GeometryParams* geometry = nullptr;
    const ReferenceBundle* bundle = nullptr;
    const HopfColeFactors* hc = nullptr;
    const ExtendedSystemMatrices* matrices = nullptr;
    const DecouplingSolution* dec = nullptr;
    const KernelSet* kernels = nullptr;
};

/// One plant step: backward-Euler diffusion, explicit convection and
/// interface update. Inputs are held constant over the step.
PlantState step_plant(const PlantState& state, double u_1, double u_2,
                      const MaterialParams& params, const GeometryParams& geometry, double dt);

TrajectoryLog run_closed_loop(const SimConfig& config, const ScenarioArtifacts& art);
TrajectoryLog run_feedforward(const SimConfig& config, const ScenarioArtifacts& art);

RunMetrics metrics(const TrajectoryLog& log, const ReferenceBundle& bundle);

/// log10 of the relative field error per node, clamped below at -16.
std::vector<double> log_relative_field_error(const std::vector<double>& field,
                                             const std::vector<double>& reference);

}  // namespace vgf

#endif

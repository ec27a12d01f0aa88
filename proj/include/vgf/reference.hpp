#ifndef VGF_REFERENCE_HPP
#define VGF_REFERENCE_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "vgf/gevrey.hpp"
#include "vgf/jet.hpp"
#include "vgf/physics.hpp"

namespace vgf {

/// Scenario definition for the flat-output trajectory: the interface ramps
/// from rest to a plateau velocity and back while the crystal-side gradient
/// holds a setpoint.
struct ScenarioSpec {
    double seed_length = 0.200;            ///< initial crystal length [m]
    double plateau_velocity = 7e-3 / 3600; ///< [m/s]
    double gradient_setpoint = 1700.0;     ///< g_r [K/m]
    double duration = 30.0 * 3600.0;       ///< [s]
    double ramp_up_start = 2.0 * 3600.0;
    double ramp_up_end = 10.0 * 3600.0;
    double ramp_down_start = 18.0 * 3600.0;
    double ramp_down_end = 26.0 * 3600.0;
    double gevrey_order = 1.9;

    void validate() const;
};

/// Reference trajectory of the flat output y_r = [gamma_r, g_r] with time
/// derivatives up to a configured maximum order.
class FlatOutputTrajectory {
  public:
    FlatOutputTrajectory(const ScenarioSpec& scenario, const GeometryParams& geometry,
                         std::size_t max_order = 14);

    double duration() const { return scenario_.duration; }
    std::size_t max_order() const { return step_.max_order(); }
    const ScenarioSpec& scenario() const { return scenario_; }

    double gamma(double t) const;
    double gamma_dot(double t) const;
    /// Jet of gamma_r at t with `len` coefficients (len - 1 derivatives).
    Jet gamma_jet(double t, std::size_t len) const;
    Jet gamma_dot_jet(double t, std::size_t len) const;
    /// Crystal-side interface gradient reference (constant in the default scenario).
    double gradient(double t) const;
    Jet gradient_jet(double t, std::size_t len) const;

  private:
    ScenarioSpec scenario_;
    GeometryParams geometry_;
    GevreyStep step_;
};

/// Power-series coefficients a_k(t), k = 0..J, of one phase about z = gamma_r,
/// returned as Taylor jets in t so the caller can keep differentiating.
/// T_phase(z, t) = sum_k a_k(t) (z - gamma_r)^k / k!.
std::vector<Jet> parametrize_phase(const FlatOutputTrajectory& flat, const MaterialParams& params,
                                   int phase, int truncation, double t, std::size_t jet_len);

/// Time-resolved references of everything the linearization and controller
/// need, tabulated on a (sigma, t) product grid.
struct ReferenceBundle {
    std::vector<double> t_grid;      ///< uniform [0, duration]
    std::vector<double> sigma_grid;  ///< uniform [0, 1]

    // per time sample
    std::vector<double> gamma_r, gamma_dot_r, gamma_ddot_r;
    std::vector<double> u1_r, u2_r;
    std::vector<double> grad1_r;  ///< dz T_1,r at the interface [K/m]
    std::vector<double> grad2_r;  ///< dz T_2,r at the interface [K/m]

    // per phase, row-major [t][sigma]
    std::array<std::vector<double>, 2> T, dT_dsigma, d2T_dsigma2, dT_dt;

    double T_m = 0.0;

    std::size_t n_t() const { return t_grid.size(); }
    std::size_t n_sigma() const { return sigma_grid.size(); }
    double dt() const { return t_grid[1] - t_grid[0]; }
    double dsigma() const { return sigma_grid[1] - sigma_grid[0]; }
    std::size_t idx(std::size_t it, std::size_t is) const { return it * n_sigma() + is; }

    /// Cubic interpolation in t of a per-time series.
    double scalar_at(const std::vector<double>& series, double t) const;
    /// Cubic interpolation in t of one field node; `table` is one of T, dT_dsigma, ...
    double field_at(const std::vector<double>& table, std::size_t is, double t) const;
    /// Full sigma column at time t (cubic in t per node).
    std::vector<double> field_column(const std::vector<double>& table, double t) const;
    /// Index of the nearest grid time, if t is within 1e-9 s of a node; -1 otherwise.
    long grid_index(double t) const;
};

/// Evaluate the flatness parametrization of both phases on the grids and
/// derive the reference inputs from the Neumann boundary conditions.
ReferenceBundle build_references(const FlatOutputTrajectory& flat, const MaterialParams& params,
                                 const GeometryParams& geometry, std::size_t n_sigma,
                                 double dt, int truncation);

}  // namespace vgf

#endif

#ifndef VGF_PHYSICS_HPP
#define VGF_PHYSICS_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vgf/errors.hpp"

namespace vgf {

/// Thermophysical constants of the grown material (both phases).
struct MaterialParams {
    double alpha_1;  ///< heat diffusivity, crystal [m^2/s]
    double alpha_2;  ///< heat diffusivity, melt [m^2/s]
    double k_1;      ///< heat conductivity, crystal [W/(m K)]
    double k_2;      ///< heat conductivity, melt [W/(m K)]
    double rho_m;    ///< density at melting temperature [kg/m^3]
    double q_star;   ///< specific heat of solidification [J/kg]
    double T_m;      ///< melting temperature [K]

    double alpha(int phase) const { return phase == 1 ? alpha_1 : alpha_2; }
    double k(int phase) const { return phase == 1 ? k_1 : k_2; }
    void validate() const;
};

/// Crucible geometry. beta_1/beta_2 orient the Neumann boundary fluxes.
struct GeometryParams {
    double Gamma_1 = 0.0;   ///< lower boundary [m]
    double Gamma_2 = 0.45;  ///< upper boundary [m]
    double beta_1 = -1.0;
    double beta_2 = 1.0;

    double Gamma(int phase) const { return phase == 1 ? Gamma_1 : Gamma_2; }
    double beta(int phase) const { return phase == 1 ? beta_1 : beta_2; }
    void validate() const;
    /// Throws AssumptionViolation unless Gamma_1 < gamma < Gamma_2.
    void require_admissible(double gamma) const;
};

struct InterfaceState {
    double gamma;      ///< interface position [m]
    double gamma_dot;  ///< interface velocity [m/s]
};

/// Temperature samples on the fixed coordinate sigma in [0,1], node 0 at the
/// interface (value T_m for physical solutions), last node at Gamma_phase.
struct PhaseField {
    std::vector<double> values;  ///< temperatures [K] on N+1 equidistant nodes
    int phase_index = 1;         ///< 1 crystal, 2 melt

    std::size_t nodes() const { return values.size(); }
    double dsigma() const { return 1.0 / static_cast<double>(values.size() - 1); }
};

struct PlantState {
    PhaseField field_1;
    PhaseField field_2;
    InterfaceState interface;
    double time = 0.0;  ///< [s]

    const PhaseField& field(int phase) const { return phase == 1 ? field_1 : field_2; }
    PhaseField& field(int phase) { return phase == 1 ? field_1 : field_2; }
};

/// Time derivatives produced by the fixed-domain evolution equations.
struct PlantRhs {
    std::vector<double> dT_1;  ///< [K/s] per node
    std::vector<double> dT_2;
    double gamma_dot;          ///< [m/s]
};

/// Fixed-domain map sigma = (z - gamma) / (Gamma_phase - gamma).
double front_fix_map(double z, double gamma, int phase, const GeometryParams& geometry);
/// Inverse map z = gamma + sigma (Gamma_phase - gamma).
double front_fix_inverse(double sigma, double gamma, int phase, const GeometryParams& geometry);

/// Stefan condition: gamma_dot = (k_1 grad_1 - k_2 grad_2) / (rho_m q_star),
/// gradients taken in the physical z coordinate at the interface.
double stefan_velocity(double grad_1, double grad_2, const MaterialParams& params);

/// Fixed-domain coefficient bundle lambda_bar, q_bar, s_bar for one phase at
/// interface position gamma. psi_bar additionally depends on (sigma, gamma_dot).
struct FixedDomainCoeffs {
    double lambda_bar;  ///< alpha / (Gamma - gamma)^2
    double q_bar;       ///< beta (Gamma - gamma) / k
    double s_bar;       ///< -beta k / (rho q* (Gamma - gamma))
    double span;        ///< Gamma - gamma
};
FixedDomainCoeffs fixed_domain_coeffs(double gamma, int phase, const MaterialParams& params,
                                      const GeometryParams& geometry);
inline double psi_bar(double sigma, double gamma_dot, double span) {
    return (1.0 - sigma) * gamma_dot / span;
}

/// Right-hand side of the front-fixed evolution equations: central differences
/// in the interior, Neumann condition at sigma=1 via a ghost node, Dirichlet
/// T_m pinned at sigma=0 (its time derivative is reported as zero).
PlantRhs fixed_domain_rhs(const PlantState& state, double u_1, double u_2,
                          const MaterialParams& params, const GeometryParams& geometry);

/// Stationary solution: linear profiles with interface value T_m, crystal
/// gradient grad_1 and the melt gradient balancing the Stefan condition.
PlantState steady_state(double gamma, double grad_1, std::size_t nodes_per_phase,
                        const MaterialParams& params, const GeometryParams& geometry);

/// Sensible heat relative to T_m plus sign conventions used by the discrete
/// enthalpy balance check: sum_i rho c_p,i integral (T_i - T_m) dz, with
/// c_p,i = k_i / (rho alpha_i).
double stored_heat(const PlantState& state, const MaterialParams& params,
                   const GeometryParams& geometry);

}  // namespace vgf

#endif

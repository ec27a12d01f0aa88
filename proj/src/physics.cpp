#include "vgf/physics.hpp"

#include <cmath>
#include <string>

#include "vgf/numeric.hpp"

namespace vgf {

void MaterialParams::validate() const {
    const double fields[] = {alpha_1, alpha_2, k_1, k_2, rho_m, q_star, T_m};
    for (double v : fields) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("MaterialParams: all fields must be strictly positive");
        }
    }
}

void GeometryParams::validate() const {
    if (!(Gamma_1 < Gamma_2)) throw ConfigError("GeometryParams: Gamma_1 < Gamma_2 required");
    if (beta_1 != -1.0 || beta_2 != 1.0) {
        throw ConfigError("GeometryParams: beta_1 = -1, beta_2 = +1 required");
    }
}

void GeometryParams::require_admissible(double gamma) const {
    if (!(Gamma_1 < gamma && gamma < Gamma_2)) {
        throw AssumptionViolation("interface position " + std::to_string(gamma) +
                                  " outside (" + std::to_string(Gamma_1) + ", " +
                                  std::to_string(Gamma_2) + ")");
    }
}

double front_fix_map(double z, double gamma, int phase, const GeometryParams& geometry) {
    geometry.require_admissible(gamma);
    const double G = geometry.Gamma(phase);
    const double lo = std::min(gamma, G), hi = std::max(gamma, G);
    if (z < lo - 1e-12 || z > hi + 1e-12) {
        throw std::domain_error("front_fix_map: z outside phase domain");
    }
    return (z - gamma) / (G - gamma);
}

double front_fix_inverse(double sigma, double gamma, int phase, const GeometryParams& geometry) {
    geometry.require_admissible(gamma);
    return gamma + sigma * (geometry.Gamma(phase) - gamma);
}

double stefan_velocity(double grad_1, double grad_2, const MaterialParams& params) {
    return (params.k_1 * grad_1 - params.k_2 * grad_2) / (params.rho_m * params.q_star);
}

FixedDomainCoeffs fixed_domain_coeffs(double gamma, int phase, const MaterialParams& params,
                                      const GeometryParams& geometry) {
    geometry.require_admissible(gamma);
    const double span = geometry.Gamma(phase) - gamma;
    const double beta = geometry.beta(phase);
    FixedDomainCoeffs c;
    c.span = span;
    c.lambda_bar = params.alpha(phase) / (span * span);
    c.q_bar = beta * span / params.k(phase);
    c.s_bar = -beta * params.k(phase) / (params.rho_m * params.q_star * span);
    return c;
}

PlantRhs fixed_domain_rhs(const PlantState& state, double u_1, double u_2,
                          const MaterialParams& params, const GeometryParams& geometry) {
    const double gamma = state.interface.gamma;
    geometry.require_admissible(gamma);

    PlantRhs rhs;
    const double inputs[2] = {u_1, u_2};

    // Interface velocity from the fixed-domain gradients at sigma = 0.
    double gamma_dot = 0.0;
    for (int phase = 1; phase <= 2; ++phase) {
        const PhaseField& f = state.field(phase);
        const auto c = fixed_domain_coeffs(gamma, phase, params, geometry);
        gamma_dot += c.s_bar * gradient_left3(f.values, f.dsigma());
    }
    rhs.gamma_dot = gamma_dot;

    for (int phase = 1; phase <= 2; ++phase) {
        const PhaseField& f = state.field(phase);
        const std::size_t n = f.nodes();
        const double ds = f.dsigma();
        const auto c = fixed_domain_coeffs(gamma, phase, params, geometry);
        std::vector<double> dT(n, 0.0);
        auto second = [&](std::size_t i, double ghost) {
            const double right = (i + 1 < n) ? f.values[i + 1] : ghost;
            return (f.values[i - 1] - 2.0 * f.values[i] + right) / (ds * ds);
        };
        // Ghost node realizing d_sigma T(1) = q_bar u.
        const double ghost = f.values[n - 2] + 2.0 * ds * c.q_bar * inputs[phase - 1];
        for (std::size_t i = 1; i < n; ++i) {
            const double sigma = static_cast<double>(i) * ds;
            const double d1 = (i + 1 < n) ? (f.values[i + 1] - f.values[i - 1]) / (2.0 * ds)
                                          : (ghost - f.values[i - 1]) / (2.0 * ds);
            dT[i] = c.lambda_bar * second(i, ghost) + psi_bar(sigma, gamma_dot, c.span) * d1;
        }
        dT[0] = 0.0;  // Dirichlet T_m
        (phase == 1 ? rhs.dT_1 : rhs.dT_2) = std::move(dT);
    }
    return rhs;
}

PlantState steady_state(double gamma, double grad_1, std::size_t nodes_per_phase,
                        const MaterialParams& params, const GeometryParams& geometry) {
    geometry.require_admissible(gamma);
    const double grad_2 = params.k_1 * grad_1 / params.k_2;
    const double grads[2] = {grad_1, grad_2};

    PlantState state;
    state.interface = {gamma, 0.0};
    for (int phase = 1; phase <= 2; ++phase) {
        PhaseField f;
        f.phase_index = phase;
        f.values.resize(nodes_per_phase);
        const double span = geometry.Gamma(phase) - gamma;
        for (std::size_t i = 0; i < nodes_per_phase; ++i) {
            const double sigma = static_cast<double>(i) / static_cast<double>(nodes_per_phase - 1);
            f.values[i] = params.T_m + grads[phase - 1] * sigma * span;
        }
        state.field(phase) = std::move(f);
    }
    return state;
}

double stored_heat(const PlantState& state, const MaterialParams& params,
                   const GeometryParams& geometry) {
    double total = 0.0;
    for (int phase = 1; phase <= 2; ++phase) {
        const PhaseField& f = state.field(phase);
        const double span = geometry.Gamma(phase) - state.interface.gamma;
        const double c_p = params.k(phase) / (params.rho_m * params.alpha(phase));
        std::vector<double> excess(f.nodes());
        for (std::size_t i = 0; i < f.nodes(); ++i) excess[i] = f.values[i] - params.T_m;
        // dz = span * dsigma; span is negative for phase 1, flip to physical length
        total += params.rho_m * c_p * std::abs(span) * trapz(excess, f.dsigma());
    }
    return total;
}

}  // namespace vgf

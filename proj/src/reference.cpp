#include "vgf/reference.hpp"

#include <cmath>
#include <string>

#include "vgf/errors.hpp"
#include "vgf/numeric.hpp"

namespace vgf {

void ScenarioSpec::validate() const {
    if (!(seed_length > 0.0)) throw ConfigError("scenario: seed_length must be positive");
    if (!(duration > 0.0)) throw ConfigError("scenario: duration must be positive");
    if (!(gradient_setpoint > 0.0)) throw ConfigError("scenario: gradient setpoint must be positive");
    if (plateau_velocity != 0.0) {
        if (!(ramp_up_start < ramp_up_end && ramp_up_end <= ramp_down_start &&
              ramp_down_start < ramp_down_end)) {
            throw ConfigError("scenario: ramp windows must be ordered and non-overlapping");
        }
    }
}

FlatOutputTrajectory::FlatOutputTrajectory(const ScenarioSpec& scenario,
                                           const GeometryParams& geometry, std::size_t max_order)
    : scenario_(scenario), geometry_(geometry), step_(scenario.gevrey_order, max_order) {
    scenario_.validate();
    geometry_.validate();
    const double g0 = geometry_.Gamma_1 + scenario_.seed_length;
    const double g_end = gamma(scenario_.duration);
    if (!(geometry_.Gamma_1 < g0 && g0 < geometry_.Gamma_2) ||
        !(geometry_.Gamma_1 < g_end && g_end < geometry_.Gamma_2)) {
        throw AssumptionViolation("planned interface trajectory leaves the admissible interval");
    }
}

double FlatOutputTrajectory::gamma(double t) const {
    const ScenarioSpec& s = scenario_;
    double g = geometry_.Gamma_1 + s.seed_length;
    if (s.plateau_velocity != 0.0) {
        g += s.plateau_velocity * (step_.integral(t, s.ramp_up_start, s.ramp_up_end) -
                                   step_.integral(t, s.ramp_down_start, s.ramp_down_end));
    }
    return g;
}

double FlatOutputTrajectory::gamma_dot(double t) const {
    const ScenarioSpec& s = scenario_;
    if (s.plateau_velocity == 0.0) return 0.0;
    return s.plateau_velocity * (step_.eval(t, s.ramp_up_start, s.ramp_up_end, 0)[0] -
                                 step_.eval(t, s.ramp_down_start, s.ramp_down_end, 0)[0]);
}

Jet FlatOutputTrajectory::gamma_jet(double t, std::size_t len) const {
    const ScenarioSpec& s = scenario_;
    std::vector<double> c(len, 0.0);
    c[0] = gamma(t);
    if (len > 1 && s.plateau_velocity != 0.0) {
        const auto up = step_.eval(t, s.ramp_up_start, s.ramp_up_end, len - 2);
        const auto dn = step_.eval(t, s.ramp_down_start, s.ramp_down_end, len - 2);
        double fact = 1.0;
        for (std::size_t k = 1; k < len; ++k) {
            fact *= static_cast<double>(k);
            c[k] = s.plateau_velocity * (up[k - 1] - dn[k - 1]) / fact;
        }
    }
    return Jet::from_coeffs(std::move(c));
}

Jet FlatOutputTrajectory::gamma_dot_jet(double t, std::size_t len) const {
    return gamma_jet(t, len + 1).differentiate();
}

double FlatOutputTrajectory::gradient(double t) const {
    (void)t;
    return scenario_.gradient_setpoint;
}

Jet FlatOutputTrajectory::gradient_jet(double t, std::size_t len) const {
    (void)t;
    return Jet::constant(len, scenario_.gradient_setpoint);
}

std::vector<Jet> parametrize_phase(const FlatOutputTrajectory& flat, const MaterialParams& params,
                                   int phase, int truncation, double t, std::size_t jet_len) {
    const std::size_t needed = static_cast<std::size_t>(truncation / 2) + 1 + jet_len;
    if (needed > flat.max_order() + 2) {
        throw CapabilityError("parametrize_phase: flat output stores too few derivatives for J=" +
                              std::to_string(truncation));
    }
    // Every recursion level a_{k+2} = (da_k/dt - gamma_dot a_{k+1}) / alpha
    // consumes one derivative order, so start the low coefficients with
    // enough headroom.
    const std::size_t top = jet_len + static_cast<std::size_t>(truncation / 2) + 1;
    const Jet gd = flat.gamma_dot_jet(t, top);
    const Jet gr = flat.gradient_jet(t, top);
    const double alpha = params.alpha(phase);

    std::vector<Jet> a;
    a.reserve(truncation + 1);
    a.push_back(Jet::constant(top, params.T_m));
    if (phase == 1) {
        a.push_back(gr);
    } else {
        a.push_back((gr * params.k_1 - gd * (params.rho_m * params.q_star)) * (1.0 / params.k_2));
    }
    for (int k = 0; k + 2 <= truncation; ++k) {
        const Jet da = a[static_cast<std::size_t>(k)].differentiate();
        const Jet prod = gd * a[static_cast<std::size_t>(k) + 1];
        a.push_back((da - prod) * (1.0 / alpha));
    }
    return a;
}

double ReferenceBundle::scalar_at(const std::vector<double>& series, double t) const {
    return interp_cubic_uniform(t_grid.front(), dt(), series, t);
}

double ReferenceBundle::field_at(const std::vector<double>& table, std::size_t is, double t) const {
    const long it = grid_index(t);
    if (it >= 0) return table[idx(static_cast<std::size_t>(it), is)];
    // gather the time series of this node (strided); fall back to cubic interp
    const std::size_t nt = n_t();
    std::vector<double> series(nt);
    for (std::size_t k = 0; k < nt; ++k) series[k] = table[idx(k, is)];
    return interp_cubic_uniform(t_grid.front(), dt(), series, t);
}

std::vector<double> ReferenceBundle::field_column(const std::vector<double>& table, double t) const {
    const std::size_t ns = n_sigma();
    std::vector<double> col(ns);
    const long it = grid_index(t);
    if (it >= 0) {
        for (std::size_t s = 0; s < ns; ++s) col[s] = table[idx(static_cast<std::size_t>(it), s)];
    } else {
        for (std::size_t s = 0; s < ns; ++s) col[s] = field_at(table, s, t);
    }
    return col;
}

long ReferenceBundle::grid_index(double t) const {
    const double u = (t - t_grid.front()) / dt();
    const double r = std::round(u);
    if (std::abs(u - r) * dt() < 1e-9 && r >= 0 && r < static_cast<double>(n_t())) {
        return static_cast<long>(r);
    }
    return -1;
}

ReferenceBundle build_references(const FlatOutputTrajectory& flat, const MaterialParams& params,
                                 const GeometryParams& geometry, std::size_t n_sigma,
                                 double dt, int truncation) {
    ReferenceBundle b;
    b.T_m = params.T_m;
    const std::size_t n_t = static_cast<std::size_t>(std::llround(flat.duration() / dt)) + 1;
    b.t_grid = linspace(0.0, flat.duration(), n_t);
    b.sigma_grid = linspace(0.0, 1.0, n_sigma);
    b.gamma_r.resize(n_t);
    b.gamma_dot_r.resize(n_t);
    b.gamma_ddot_r.resize(n_t);
    b.u1_r.resize(n_t);
    b.u2_r.resize(n_t);
    b.grad1_r.resize(n_t);
    b.grad2_r.resize(n_t);
    for (auto* arr : {&b.T, &b.dT_dsigma, &b.d2T_dsigma2, &b.dT_dt}) {
        (*arr)[0].assign(n_t * n_sigma, 0.0);
        (*arr)[1].assign(n_t * n_sigma, 0.0);
    }

    const std::size_t jet_len = 2;  // value + first time derivative of each a_k
    for (std::size_t it = 0; it < n_t; ++it) {
        const double t = b.t_grid[it];
        const Jet gj = flat.gamma_jet(t, 3);
        const double gamma = gj.value();
        const double gamma_dot = gj.derivative(1);
        b.gamma_r[it] = gamma;
        b.gamma_dot_r[it] = gamma_dot;
        b.gamma_ddot_r[it] = gj.derivative(2);

        for (int phase = 1; phase <= 2; ++phase) {
            const auto a = parametrize_phase(flat, params, phase, truncation, t, jet_len);
            const double span = geometry.Gamma(phase) - gamma;
            auto& T = b.T[phase - 1];
            auto& D1 = b.dT_dsigma[phase - 1];
            auto& D2 = b.d2T_dsigma2[phase - 1];
            auto& Dt = b.dT_dt[phase - 1];
            (phase == 1 ? b.grad1_r[it] : b.grad2_r[it]) = a[1].value();

            for (std::size_t is = 0; is < n_sigma; ++is) {
                const double sigma = b.sigma_grid[is];
                const double delta = sigma * span;  // z - gamma_r
                // Evaluation of sum a_k delta^k / k! and its z-derivatives.
                // At fixed sigma, delta = sigma (Gamma - gamma_r) moves with
                // the reference: d(delta)/dt = -sigma gamma_dot, so
                // dT/dt|_sigma = sum (da_k/dt) delta^k/k! - sigma gamma_dot dT/dz.
                double val = 0.0, d1 = 0.0, d2 = 0.0, dt_part = 0.0;
                double pow_k = 1.0, fact = 1.0;
                for (int k = 0; k <= truncation; ++k) {
                    const double base = pow_k / fact;
                    const Jet& ak = a[static_cast<std::size_t>(k)];
                    val += ak.value() * base;
                    dt_part += ak.derivative(1) * base;
                    if (k + 1 <= truncation) d1 += a[static_cast<std::size_t>(k) + 1].value() * base;
                    if (k + 2 <= truncation) d2 += a[static_cast<std::size_t>(k) + 2].value() * base;
                    pow_k *= delta;
                    fact *= static_cast<double>(k + 1);
                }
                const std::size_t ii = b.idx(it, is);
                T[ii] = val;
                D1[ii] = d1 * span;         // dT/dsigma = dT/dz * span
                D2[ii] = d2 * span * span;
                Dt[ii] = dt_part - sigma * gamma_dot * d1;
            }
            // reference inputs from the Neumann conditions at the outer
            // boundaries: u_1 = -k_1 dzT_1(Gamma_1), u_2 = +k_2 dzT_2(Gamma_2)
            double dz_boundary = 0.0, pow_k = 1.0, fact = 1.0;
            for (int k = 1; k <= truncation; ++k) {
                dz_boundary += a[static_cast<std::size_t>(k)].value() * pow_k / fact;
                pow_k *= span;
                fact *= static_cast<double>(k);
            }
            if (phase == 1) {
                b.u1_r[it] = -params.k_1 * dz_boundary;
            } else {
                b.u2_r[it] = params.k_2 * dz_boundary;
            }
        }
    }
    return b;
}

}  // namespace vgf

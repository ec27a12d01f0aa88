#include "vgf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vgf/errors.hpp"
#include "vgf/numeric.hpp"

namespace vgf {

void SimConfig::validate() const {
    if (elements_per_phase < 8) throw ConfigError("sim: need at least 8 elements per phase");
    if (!(dt_plant > 0.0) || !(dt_controller > 0.0)) throw ConfigError("sim: time steps must be positive");
    const double ratio = dt_controller / dt_plant;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        throw ConfigError("sim: dt_controller must be an integer multiple of dt_plant");
    }
    if (!(duration > 0.0)) throw ConfigError("sim: duration must be positive");
    if (!(snapshot_interval > 0.0)) throw ConfigError("sim: snapshot interval must be positive");
}

PlantState step_plant(const PlantState& state, double u_1, double u_2,
                      const MaterialParams& params, const GeometryParams& geometry, double dt) {
    if (!(dt > 0.0)) throw ConfigError("step_plant: dt must be positive");
    const double gamma = state.interface.gamma;

    // interface velocity from the current physical gradients, explicit update
    std::array<double, 2> grad_z;
    for (int phase = 1; phase <= 2; ++phase) {
        const PhaseField& f = state.field(phase);
        const double span = geometry.Gamma(phase) - gamma;
        grad_z[phase - 1] = gradient_left3(f.values, f.dsigma()) / span;
    }
    const double gamma_dot = stefan_velocity(grad_z[0], grad_z[1], params);
    const double gamma_new = gamma + dt * gamma_dot;
    try {
        geometry.require_admissible(gamma_new);
    } catch (const AssumptionViolation& e) {
        throw SimulationAbort(std::string("step_plant: ") + e.what() +
                              " (t = " + std::to_string(state.time) + " s)");
    }

    PlantState next = state;
    next.time = state.time + dt;
    next.interface = {gamma_new, gamma_dot};

    for (int phase = 1; phase <= 2; ++phase) {
        const FixedDomainCoeffs cf = fixed_domain_coeffs(gamma_new, phase, params, geometry);
        const PhaseField& f = state.field(phase);
        const std::size_t n = f.nodes();
        const double h = f.dsigma();
        const double r = dt * cf.lambda_bar / (h * h);
        const double u = (phase == 1) ? u_1 : u_2;

        std::vector<double> lower(n - 1, 0.0), diag(n, 1.0), upper(n - 1, 0.0), rhs(n, 0.0);
        rhs[0] = params.T_m;  // Dirichlet at the interface
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double sigma = static_cast<double>(i) * h;
            const double conv =
                psi_bar(sigma, gamma_dot, cf.span) * (f.values[i + 1] - f.values[i - 1]) / (2.0 * h);
            lower[i - 1] = -r;
            diag[i] = 1.0 + 2.0 * r;
            upper[i] = -r;
            rhs[i] = f.values[i] + dt * conv;
        }
        // ghost-node Neumann row at sigma = 1: dT/dsigma = q_bar * u
        lower[n - 2] = -2.0 * r;
        diag[n - 1] = 1.0 + 2.0 * r;
        rhs[n - 1] = f.values[n - 1] + 2.0 * r * h * cf.q_bar * u;

        try {
            next.field(phase).values = solve_tridiagonal(lower, diag, upper, rhs);
        } catch (const std::exception& e) {
            throw SimulationAbort(std::string("step_plant: implicit solve failed: ") + e.what());
        }
    }
    return next;
}

namespace {

PlantState initial_state(const SimConfig& config, const ScenarioArtifacts& art) {
    const ReferenceBundle& b = *art.bundle;
    const MaterialParams& p = *art.params;
    const GeometryParams& g = *art.geometry;

    const double gamma0 = b.gamma_r[0] + config.delta_gamma_0;
    g.require_admissible(gamma0);
    const double grad_1 = b.grad1_r[0] + config.delta_grad_0;
    const double gamma_dot0 = b.gamma_dot_r[0] + config.delta_gamma_dot_0;
    // melt gradient chosen so the Stefan condition reproduces the requested
    // initial velocity exactly
    const double grad_2 = (p.k_1 * grad_1 - p.rho_m * p.q_star * gamma_dot0) / p.k_2;

    PlantState st;
    st.time = 0.0;
    st.interface = {gamma0, gamma_dot0};
    const std::size_t n = config.elements_per_phase + 1;
    for (int phase = 1; phase <= 2; ++phase) {
        PhaseField& f = st.field(phase);
        f.phase_index = phase;
        f.values.resize(n);
        const double span = g.Gamma(phase) - gamma0;
        const double grad = (phase == 1) ? grad_1 : grad_2;
        for (std::size_t i = 0; i < n; ++i) {
            const double sigma = static_cast<double>(i) / static_cast<double>(n - 1);
            f.values[i] = p.T_m + grad * sigma * span;
        }
    }
    return st;
}

TrajectoryLog run_scenario(const SimConfig& config, const ScenarioArtifacts& art,
                           bool closed_loop) {
    config.validate();
    if (!art.params || !art.geometry || !art.bundle) {
        throw ConfigError("run: missing params/geometry/reference artifacts");
    }
    if (closed_loop && (!art.hc || !art.matrices || !art.dec || !art.kernels)) {
        throw ConfigError("run: closed loop requires synthesis artifacts");
    }
    const ReferenceBundle& b = *art.bundle;

    PlantState state = initial_state(config, art);
    ControllerState ctrl;
    TrajectoryLog log;

    const long ratio = std::lround(config.dt_controller / config.dt_plant);
    const long n_ticks = static_cast<long>(std::floor(config.duration / config.dt_controller + 0.5));
    const long snap_every =
        std::max(1L, std::lround(config.snapshot_interval / config.dt_controller));

    for (long k = 0; k <= n_ticks; ++k) {
        const double t = static_cast<double>(k) * config.dt_controller;

        double u1, u2, eps = 0.0;
        if (closed_loop) {
            ErrorPipelineResult res = error_pipeline(state, b, *art.hc, *art.dec, ctrl, t);
            if (k == 0) {
                ctrl.prev_rate = res.grad_error_at_0;
                ctrl.has_prev = true;
            } else {
                ctrl = integrator_step(ctrl, res.grad_error_at_0, config.dt_controller);
            }
            const Eigen::Vector2d x_new(res.x(0), ctrl.epsilon);
            const auto w_tilde =
                apply_decoupling(res.w_tilde_dec, x_new - res.x, *art.dec, t);
            const ControlOutput out =
                control_law(w_tilde, x_new, t, *art.kernels, *art.matrices, *art.dec, b);
            u1 = out.u_1;
            u2 = out.u_2;
            eps = ctrl.epsilon;
        } else {
            u1 = b.scalar_at(b.u1_r, t);
            u2 = b.scalar_at(b.u2_r, t);
        }

        const PhaseField& f1 = state.field_1;
        const double span1 = art.geometry->Gamma_1 - state.interface.gamma;
        log.t.push_back(t);
        log.gamma.push_back(state.interface.gamma);
        log.gamma_dot.push_back(state.interface.gamma_dot);
        log.gamma_ref.push_back(b.scalar_at(b.gamma_r, t));
        log.grad_1.push_back(gradient_left3(f1.values, f1.dsigma()) / span1);
        log.grad_1_ref.push_back(b.scalar_at(b.grad1_r, t));
        log.u_1.push_back(u1);
        log.u_2.push_back(u2);
        log.u_1_ref.push_back(b.scalar_at(b.u1_r, t));
        log.u_2_ref.push_back(b.scalar_at(b.u2_r, t));
        log.epsilon.push_back(eps);
        log.x_gamma.push_back(state.interface.gamma - log.gamma_ref.back());
        if (k % snap_every == 0) {
            log.snapshot_t.push_back(t);
            log.snapshot_T1.push_back(state.field_1.values);
            log.snapshot_T2.push_back(state.field_2.values);
        }

        if (k == n_ticks) break;
        for (long s = 0; s < ratio; ++s) {
            state = step_plant(state, u1, u2, *art.params, *art.geometry, config.dt_plant);
        }
    }
    return log;
}

}  // namespace

TrajectoryLog run_closed_loop(const SimConfig& config, const ScenarioArtifacts& art) {
    return run_scenario(config, art, true);
}

TrajectoryLog run_feedforward(const SimConfig& config, const ScenarioArtifacts& art) {
    return run_scenario(config, art, false);
}

RunMetrics metrics(const TrajectoryLog& log, const ReferenceBundle& bundle) {
    RunMetrics m;
    if (log.t.empty()) return m;
    const double gamma_tol = 1e-3;  // m
    const double grad_tol = 50.0;   // K/m (0.5 K/cm)

    long last_violation = -1;
    double min_grad_err = 0.0;
    for (std::size_t k = 0; k < log.t.size(); ++k) {
        const double dg = log.gamma[k] - log.gamma_ref[k];
        const double ge = log.grad_1[k] - log.grad_1_ref[k];
        m.max_abs_dgamma = std::max(m.max_abs_dgamma, std::abs(dg));
        min_grad_err = std::min(min_grad_err, ge);
        if (std::abs(dg) >= gamma_tol || std::abs(ge) >= grad_tol) {
            last_violation = static_cast<long>(k);
        }
    }
    m.final_dgamma = log.gamma.back() - log.gamma_ref.back();
    m.undershoot = min_grad_err;
    if (last_violation + 1 < static_cast<long>(log.t.size())) {
        m.settling_time = log.t[static_cast<std::size_t>(last_violation + 1)];
    } else {
        m.settling_time = -1.0;
    }

    for (std::size_t s = 0; s < log.snapshot_t.size(); ++s) {
        const double t = log.snapshot_t[s];
        for (int phase = 1; phase <= 2; ++phase) {
            const auto& field = (phase == 1) ? log.snapshot_T1[s] : log.snapshot_T2[s];
            const auto ref_col = bundle.field_column(bundle.T[phase - 1], t);
            const auto ref = (ref_col.size() == field.size())
                                 ? ref_col
                                 : resample_unit_grid(ref_col, field.size());
            for (std::size_t i = 0; i < field.size(); ++i) {
                m.max_field_error = std::max(m.max_field_error, std::abs(field[i] - ref[i]));
            }
        }
    }
    return m;
}

std::vector<double> log_relative_field_error(const std::vector<double>& field,
                                             const std::vector<double>& reference) {
    if (field.size() != reference.size()) {
        throw ConfigError("log_relative_field_error: size mismatch");
    }
    std::vector<double> out(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double rel = std::abs((field[i] - reference[i]) / reference[i]);
        out[i] = (rel > 0.0) ? std::max(std::log10(rel), -16.0) : -16.0;
    }
    return out;
}

}  // namespace vgf

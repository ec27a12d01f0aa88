#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "vgf/cli.hpp"
#include "vgf/control.hpp"
#include "vgf/numeric.hpp"

using namespace vgf;

namespace {

RunConfig short_config() {
    RunConfig cfg = default_config();
    cfg.scenario.duration = 2.0 * 3600;
    cfg.scenario.ramp_up_start = 600.0;
    cfg.scenario.ramp_up_end = 3000.0;
    cfg.scenario.ramp_down_start = 4200.0;
    cfg.scenario.ramp_down_end = 6600.0;
    cfg.numerics.dt_reference = 60.0;
    cfg.numerics.n_sigma = 41;
    cfg.numerics.series_order = 16;
    cfg.numerics.kernel_snapshots = 3;
    cfg.sim.duration = cfg.scenario.duration;
    cfg.sim.elements_per_phase = 40;
    return cfg;
}

/// Plant state sitting exactly on the reference at a bundle grid time.
PlantState reference_state(const Pipeline& pl, std::size_t it) {
    PlantState st;
    st.time = pl.bundle.t_grid[it];
    st.interface.gamma = pl.bundle.gamma_r[it];
    st.interface.gamma_dot = pl.bundle.gamma_dot_r[it];
    for (int phase : {1, 2}) {
        auto& f = st.field(phase);
        f.phase_index = phase;
        f.values.resize(pl.bundle.n_sigma());
        for (std::size_t is = 0; is < pl.bundle.n_sigma(); ++is)
            f.values[is] = pl.bundle.T[phase - 1][pl.bundle.idx(it, is)];
    }
    return st;
}

}  // namespace

TEST_CASE("controller chain") {
    const RunConfig cfg = short_config();
    const Pipeline pl = build_pipeline(cfg, true);
    const std::size_t it = pl.bundle.n_t() / 2;
    const double t = pl.bundle.t_grid[it];
    ControllerState ctrl;

    SUBCASE("on-reference state produces the reference input") {
        const PlantState st = reference_state(pl, it);
        const auto res = error_pipeline(st, pl.bundle, pl.hc, pl.dec, ctrl, t);
        CHECK(res.x.norm() < 1e-12);
        CHECK(std::abs(res.grad_error_at_0) < 1e-10);
        for (const auto& v : res.w_tilde_dec) CHECK(v.norm() < 1e-13);

        const auto out = control_law(res.w_tilde_dec, res.x, t, pl.kernels, pl.matrices, pl.dec,
                                     pl.bundle);
        CHECK(out.u_e.norm() < 1e-10);
        CHECK(out.u_1 == doctest::Approx(pl.bundle.u1_r[it]).epsilon(1e-12));
        CHECK(out.u_2 == doctest::Approx(pl.bundle.u2_r[it]).epsilon(1e-12));
    }

    SUBCASE("error fields pass through the Hopf-Cole factor") {
        PlantState st = reference_state(pl, it);
        const double slope = 40.0;  // K per unit sigma on the crystal side
        const auto h1 = pl.hc.h_column(1, t);
        for (std::size_t is = 0; is < st.field_1.values.size(); ++is) {
            const double sigma = static_cast<double>(is) * st.field_1.dsigma();
            st.field_1.values[is] += slope * sigma * h1[is];
        }
        const auto res = error_pipeline(st, pl.bundle, pl.hc, pl.dec, ctrl, t);
        // v_1 = (T - T_ref)/h_1 = slope * sigma, so the one-sided gradient is exact
        CHECK(res.grad_error_at_0 == doctest::Approx(slope).epsilon(1e-9));
        for (std::size_t is = 0; is < res.w_tilde_dec.size(); ++is) {
            const double sigma = static_cast<double>(is) * st.field_1.dsigma();
            CHECK(res.w_tilde_dec[is](0) == doctest::Approx(slope * sigma).epsilon(1e-10));
            CHECK(std::abs(res.w_tilde_dec[is](1)) < 1e-10);
        }
    }

    SUBCASE("pure ODE deviation gives the closed-form correction") {
        const Eigen::Vector2d x(-2e-3, 150.0);
        const std::vector<Eigen::Vector2d> zero(pl.bundle.n_sigma(), Eigen::Vector2d::Zero());
        const auto out = control_law(zero, x, t, pl.kernels, pl.matrices, pl.dec, pl.bundle);
        const Eigen::Vector2d expected =
            pl.matrices.Q(t).inverse() * (-pl.dec.P_bar(pl.matrices, t) * x);
        CHECK((out.u_e - expected).norm() < 1e-12 * expected.norm());
        CHECK(out.integral_term.norm() == 0.0);
        CHECK(out.boundary_term.norm() == 0.0);
    }

    SUBCASE("the feedback is linear in the error") {
        PlantState st1 = reference_state(pl, it), st2 = reference_state(pl, it);
        for (int phase : {1, 2}) {
            auto& f1 = st1.field(phase).values;
            auto& f2 = st2.field(phase).values;
            for (std::size_t is = 0; is < f1.size(); ++is) {
                const double sigma = static_cast<double>(is) / static_cast<double>(f1.size() - 1);
                const double bump = (phase == 1 ? 3.0 : -2.0) * sigma * (1.3 - sigma);
                f1[is] += bump;
                f2[is] += 2.0 * bump;
            }
        }
        st1.interface.gamma += 1e-3;
        st2.interface.gamma += 2e-3;
        ControllerState c1, c2;
        c1.epsilon = 80.0;
        c2.epsilon = 160.0;
        const auto r1 = error_pipeline(st1, pl.bundle, pl.hc, pl.dec, c1, t);
        const auto r2 = error_pipeline(st2, pl.bundle, pl.hc, pl.dec, c2, t);
        const auto o1 = control_law(r1.w_tilde_dec, r1.x, t, pl.kernels, pl.matrices, pl.dec,
                                    pl.bundle);
        const auto o2 = control_law(r2.w_tilde_dec, r2.x, t, pl.kernels, pl.matrices, pl.dec,
                                    pl.bundle);
        CHECK((o2.u_e - 2.0 * o1.u_e).norm() < 1e-9 * o1.u_e.norm());
    }
}

TEST_CASE("trapezoidal integrator") {
    ControllerState ctrl;

    SUBCASE("zero error leaves the state untouched") {
        ctrl = integrator_step(ctrl, 0.0, 10.0);
        ctrl = integrator_step(ctrl, 0.0, 10.0);
        CHECK(ctrl.epsilon == 0.0);
    }

    SUBCASE("constant error accumulates linearly") {
        const double g = 0.37, dt = 10.0;
        for (int k = 0; k < 25; ++k) ctrl = integrator_step(ctrl, g, dt);
        CHECK(ctrl.epsilon == doctest::Approx(25.0 * dt * g).epsilon(1e-13));
    }

    SUBCASE("sampled sinusoid integrates at second order") {
        const double omega = 2.0 * std::acos(-1.0) / 400.0;
        auto run = [&](double dt) {
            ControllerState c;
            c.has_prev = true;
            c.prev_rate = std::sin(0.0);
            const int n = static_cast<int>(300.0 / dt);
            for (int k = 1; k <= n; ++k) c = integrator_step(c, std::sin(omega * k * dt), dt);
            const double exact = (1.0 - std::cos(omega * n * dt)) / omega;
            return std::abs(c.epsilon - exact);
        };
        const double e1 = run(10.0), e2 = run(5.0);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
        CHECK(e1 < 1e-2 * 400.0 / (2.0 * std::acos(-1.0)));
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vgf/numeric.hpp"
#include "vgf/physics.hpp"

using namespace vgf;

namespace {

MaterialParams gaas() {
    MaterialParams p;
    p.alpha_1 = 2.93286052e-6;
    p.alpha_2 = 7.18262812e-6;
    p.k_1 = 7.1;
    p.k_2 = 17.8;
    p.rho_m = 5710.0;
    p.q_star = 7.26e5;
    p.T_m = 1511.0;
    return p;
}

}  // namespace

TEST_CASE("front fixing map endpoints and roundtrip") {
    GeometryParams geo;
    const double gamma = 0.2;
    CHECK(front_fix_map(gamma, gamma, 1, geo) == 0.0);
    CHECK(front_fix_map(gamma, gamma, 2, geo) == 0.0);
    CHECK(front_fix_map(geo.Gamma_1, gamma, 1, geo) == 1.0);
    CHECK(front_fix_map(geo.Gamma_2, gamma, 2, geo) == 1.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ug(0.05, 0.40);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double g = ug(rng);
        for (int phase : {1, 2}) {
            const double z = front_fix_inverse(us(rng), g, phase, geo);
            const double z2 = front_fix_inverse(front_fix_map(z, g, phase, geo), g, phase, geo);
            worst = std::max(worst, std::abs(z2 - z));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("front fixing rejects an interface outside the crucible") {
    GeometryParams geo;
    CHECK_THROWS_AS(front_fix_map(0.1, -0.01, 1, geo), AssumptionViolation);
    CHECK_THROWS_AS(front_fix_map(0.1, geo.Gamma_2 + 0.01, 1, geo), AssumptionViolation);
}

TEST_CASE("stefan velocity balances conductive fluxes") {
    const MaterialParams p = gaas();
    CHECK(stefan_velocity(0.0, 0.0, p) == 0.0);
    CHECK(stefan_velocity(p.rho_m * p.q_star / p.k_1, 0.0, p) == doctest::Approx(1.0).epsilon(1e-14));
    // balanced fluxes: k_1 g_1 = k_2 g_2
    const double g1 = 1700.0;
    CHECK(std::abs(stefan_velocity(g1, p.k_1 * g1 / p.k_2, p)) < 1e-12);
    // antisymmetry in the flux difference
    CHECK(stefan_velocity(1000.0, 300.0, p) == doctest::Approx(-stefan_velocity(-1000.0, -300.0, p)));
}

TEST_CASE("steady state is stationary under matching inputs") {
    const MaterialParams p = gaas();
    GeometryParams geo;
    const double grad_1 = 1700.0;
    const PlantState st = steady_state(0.2, grad_1, 64, p, geo);

    CHECK(st.field_1.values[0] == p.T_m);
    CHECK(st.field_2.values[0] == p.T_m);
    CHECK(std::abs(st.interface.gamma_dot) < 1e-15);

    // zero gradient -> uniform melting temperature
    const PlantState flat = steady_state(0.2, 0.0, 16, p, geo);
    for (int phase : {1, 2})
        for (double v : flat.field(phase).values) CHECK(v == doctest::Approx(p.T_m).epsilon(1e-15));

    // matching constant inputs hold the linear profiles: u_i = beta_i k_i dzT_i(Gamma_i)
    const double grad_2 = p.k_1 * grad_1 / p.k_2;
    const double u_1 = geo.beta_1 * p.k_1 * grad_1;
    const double u_2 = geo.beta_2 * p.k_2 * grad_2;
    const PlantRhs rhs = fixed_domain_rhs(st, u_1, u_2, p, geo);
    CHECK(std::abs(rhs.gamma_dot) < 1e-12);
    for (double v : rhs.dT_1) CHECK(std::abs(v) < 1e-9);
    for (double v : rhs.dT_2) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("interface velocity equals the Stefan condition on converted gradients") {
    const MaterialParams p = gaas();
    GeometryParams geo;
    // a non-steady field: quadratic bumps on both phases
    PlantState st = steady_state(0.22, 1500.0, 32, p, geo);
    for (std::size_t j = 0; j < st.field_1.values.size(); ++j) {
        const double s = static_cast<double>(j) * st.field_1.dsigma();
        st.field_1.values[j] += 2.0 * s * (1.0 - s);
        st.field_2.values[j] -= 1.5 * s * (1.0 - 0.7 * s);
    }
    const PlantRhs rhs = fixed_domain_rhs(st, 1.2e4, -0.4e4, p, geo);

    // chain rule: dz T_i = dsigma T_i / (Gamma_i - gamma)
    const double ds = st.field_1.dsigma();
    const double g1s = gradient_left3(st.field_1.values, ds);
    const double g2s = gradient_left3(st.field_2.values, ds);
    const double g1 = g1s / (geo.Gamma_1 - st.interface.gamma);
    const double g2 = g2s / (geo.Gamma_2 - st.interface.gamma);
    CHECK(rhs.gamma_dot == doctest::Approx(stefan_velocity(g1, g2, p)).epsilon(1e-14));
}

TEST_CASE("explicit step matches the moving-grid reference solver over 10 s") {
    const MaterialParams p = gaas();
    GeometryParams geo;
    const std::size_t n = 257;
    // smooth perturbation of a steady profile
    PlantState st = steady_state(0.2, 1700.0, n, p, geo);
    const double pi = std::acos(-1.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double s = static_cast<double>(j) * st.field_1.dsigma();
        st.field_1.values[j] += 1.0 * std::sin(pi * s) * s;
        st.field_2.values[j] += 0.6 * std::sin(pi * s) * s;
    }
    const double u_1 = geo.beta_1 * p.k_1 * 1700.0;
    const double u_2 = geo.beta_2 * p.k_2 * (p.k_1 * 1700.0 / p.k_2);

    vgf::testing::MovingGridSolver oracle(p, geo, n);
    oracle.init_from(st);

    const double dt = 0.01;
    const int steps = 1000;  // 10 s
    for (int k = 0; k < steps; ++k) {
        const PlantRhs rhs = fixed_domain_rhs(st, u_1, u_2, p, geo);
        for (std::size_t j = 0; j < n; ++j) {
            st.field_1.values[j] += dt * rhs.dT_1[j];
            st.field_2.values[j] += dt * rhs.dT_2[j];
        }
        st.interface.gamma += dt * rhs.gamma_dot;
        st.interface.gamma_dot = rhs.gamma_dot;
        oracle.step(u_1, u_2, dt);
    }

    CHECK(std::abs(oracle.gamma() - st.interface.gamma) < 1e-9);
    double worst = 0.0;
    for (int phase : {1, 2}) {
        const auto& f = st.field(phase).values;
        for (std::size_t j = 0; j < n; ++j) {
            const double s = static_cast<double>(j) * st.field(phase).dsigma();
            const double z = front_fix_inverse(s, st.interface.gamma, phase, geo);
            worst = std::max(worst, std::abs(f[j] - oracle.sample(phase, z)));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("stored heat of linear profiles matches the closed form") {
    const MaterialParams p = gaas();
    GeometryParams geo;
    const double gamma = 0.2, grad_1 = 1700.0;
    const PlantState st = steady_state(gamma, grad_1, 200, p, geo);
    // integral of a linear profile T - T_m = g (z - gamma): g len^2 / 2 toward Gamma
    const double cp1 = p.k_1 / (p.rho_m * p.alpha_1);
    const double cp2 = p.k_2 / (p.rho_m * p.alpha_2);
    const double grad_2 = p.k_1 * grad_1 / p.k_2;
    const double len1 = gamma - geo.Gamma_1, len2 = geo.Gamma_2 - gamma;
    const double expected =
        p.rho_m * (cp1 * (-grad_1) * len1 * len1 / 2.0 + cp2 * grad_2 * len2 * len2 / 2.0);
    CHECK(stored_heat(st, p, geo) == doctest::Approx(expected).epsilon(1e-10));
}

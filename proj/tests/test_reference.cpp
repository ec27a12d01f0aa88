#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "vgf/errors.hpp"
#include "vgf/gevrey.hpp"
#include "vgf/numeric.hpp"
#include "vgf/reference.hpp"

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

TEST_CASE("Gevrey step endpoints, symmetry and derivative consistency") {
    GevreyStep step(1.9);
    const double t0 = 100.0, t1 = 500.0;

    auto at_start = step.eval(t0, t0, t1, 6);
    for (double v : at_start) CHECK(std::abs(v) < 1e-30);
    auto at_end = step.eval(t1, t0, t1, 6);
    CHECK(at_end[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < at_end.size(); ++k) CHECK(std::abs(at_end[k]) < 1e-12);

    // integrand is symmetric about the window midpoint
    CHECK(step.eval(0.5 * (t0 + t1), t0, t1, 1)[0] == doctest::Approx(0.5).epsilon(1e-12));

    // first derivative against central differences of the value
    const double dh = 1e-3;
    for (int j = 1; j <= 20; ++j) {
        const double t = t0 + (t1 - t0) * j / 21.0;
        const double fd =
            (step.eval(t + dh, t0, t1, 1)[0] - step.eval(t - dh, t0, t1, 1)[0]) / (2.0 * dh);
        const double an = step.eval(t, t0, t1, 2)[1];
        CHECK(an == doctest::Approx(fd).epsilon(1e-6));
    }

    CHECK_THROWS_AS(step.eval(t0, t0, t1, 20), CapabilityError);
}

TEST_CASE("flat output trajectory reproduces the growth scenario") {
    GeometryParams geo;
    ScenarioSpec sc;  // defaults: 200 mm seed, 7 mm/h, 1700 K/m, 30 h
    FlatOutputTrajectory flat(sc, geo);

    CHECK(flat.gamma(0.0) == doctest::Approx(0.200).epsilon(1e-15));
    CHECK(flat.gamma_dot(0.0) == 0.0);
    CHECK(flat.gamma_dot(14.0 * 3600) == doctest::Approx(7e-3 / 3600).epsilon(1e-12));
    CHECK(flat.gradient(0.0) == 1700.0);
    CHECK(flat.gradient(sc.duration) == 1700.0);

    // total growth equals the quadrature of the velocity profile
    const double growth = flat.gamma(sc.duration) - flat.gamma(0.0);
    const double quad = gauss_legendre([&](double t) { return flat.gamma_dot(t); }, 0.0,
                                       sc.duration, 256);
    CHECK(std::abs(growth - quad) < 1e-9);
}

TEST_CASE("zero plateau velocity keeps the interface at the seed length") {
    GeometryParams geo;
    ScenarioSpec sc;
    sc.plateau_velocity = 0.0;
    FlatOutputTrajectory flat(sc, geo);
    for (double t : {0.0, 5.0 * 3600, 15.0 * 3600, 30.0 * 3600}) {
        CHECK(flat.gamma(t) == doctest::Approx(sc.seed_length).epsilon(1e-15));
        CHECK(flat.gamma_dot(t) == 0.0);
    }
}

TEST_CASE("series parametrization collapses to a linear profile at rest") {
    GeometryParams geo;
    const MaterialParams p = gaas();
    ScenarioSpec sc;
    sc.plateau_velocity = 0.0;
    FlatOutputTrajectory flat(sc, geo);

    const auto a1 = parametrize_phase(flat, p, 1, 8, 9.0 * 3600, 3);
    CHECK(a1[0].value() == doctest::Approx(p.T_m).epsilon(1e-15));
    CHECK(a1[1].value() == doctest::Approx(1700.0).epsilon(1e-13));
    for (std::size_t k = 2; k < a1.size(); ++k) CHECK(std::abs(a1[k].value()) < 1e-8);

    // melt-side slope balances the Stefan condition at gamma_dot = 0
    const auto a2 = parametrize_phase(flat, p, 2, 8, 9.0 * 3600, 3);
    CHECK(a2[1].value() == doctest::Approx(p.k_1 * 1700.0 / p.k_2).epsilon(1e-13));
}

TEST_CASE("truncated series satisfies the heat equation and Stefan condition") {
    GeometryParams geo;
    const MaterialParams p = gaas();
    ScenarioSpec sc;
    FlatOutputTrajectory flat(sc, geo);
    const int J = 20;

    double worst_pde = 0.0, worst_stefan = 0.0;
    for (double t : linspace(0.0, sc.duration, 13)) {
        const double gamma_r = flat.gamma(t);
        const double gdot_r = flat.gamma_dot(t);
        for (int phase : {1, 2}) {
            const auto a = parametrize_phase(flat, p, phase, J, t, 2);
            const double alpha = p.alpha(phase);
            const double lim = phase == 1 ? geo.Gamma_1 : geo.Gamma_2;
            // residual of dtT + (moving-frame shift) = alpha dz^2 T in the frame
            // z - gamma_r: dt a_k - gdot a_{k+1} = alpha a_{k+2}
            for (double frac : {0.0, 0.25, 0.5, 0.8, 1.0}) {
                const double dz = frac * (lim - gamma_r);
                double res = 0.0, fac = 1.0;
                for (int k = 0; k + 2 <= J; ++k) {
                    const double lhs = a[k].derivative(1) - gdot_r * a[k + 1].value();
                    res += (lhs - alpha * a[k + 2].value()) * fac;
                    fac *= dz / (k + 1);
                }
                worst_pde = std::max(worst_pde, std::abs(res));
            }
        }
        const auto a1 = parametrize_phase(flat, p, 1, J, t, 2);
        const auto a2 = parametrize_phase(flat, p, 2, J, t, 2);
        const double lhs = p.rho_m * p.q_star * gdot_r;
        const double rhs = p.k_1 * a1[1].value() - p.k_2 * a2[1].value();
        worst_stefan = std::max(worst_stefan, std::abs(lhs - rhs) / (p.k_1 * 1700.0));
    }
    CHECK(worst_pde < 1e-3);
    CHECK(worst_stefan < 1e-6);
}

TEST_CASE("reference bundle fixes the interface temperature and steady fluxes") {
    GeometryParams geo;
    const MaterialParams p = gaas();
    ScenarioSpec sc;
    sc.plateau_velocity = 0.0;
    sc.duration = 4.0 * 3600;
    sc.ramp_up_start = 600.0;
    sc.ramp_up_end = 4200.0;
    sc.ramp_down_start = 7200.0;
    sc.ramp_down_end = 10800.0;
    FlatOutputTrajectory flat(sc, geo);
    const ReferenceBundle b = build_references(flat, p, geo, 51, 60.0, 12);

    for (std::size_t it = 0; it < b.n_t(); ++it) {
        CHECK(b.T[0][b.idx(it, 0)] == doctest::Approx(p.T_m).epsilon(1e-15));
        CHECK(b.T[1][b.idx(it, 0)] == doctest::Approx(p.T_m).epsilon(1e-15));
        // flux balance of the steady linear profiles
        CHECK(b.u1_r[it] == doctest::Approx(-p.k_1 * 1700.0).epsilon(1e-9));
        CHECK(b.u2_r[it] == doctest::Approx(p.k_1 * 1700.0).epsilon(1e-9));
        CHECK(std::abs(b.gamma_dot_r[it]) < 1e-18);
    }
}

TEST_CASE("bundle interpolation agrees with grid samples") {
    GeometryParams geo;
    const MaterialParams p = gaas();
    ScenarioSpec sc;
    sc.duration = 2.0 * 3600;
    sc.ramp_up_start = 600.0;
    sc.ramp_up_end = 3000.0;
    sc.ramp_down_start = 4200.0;
    sc.ramp_down_end = 6600.0;
    FlatOutputTrajectory flat(sc, geo);
    const ReferenceBundle b = build_references(flat, p, geo, 41, 30.0, 12);

    const std::size_t it = b.n_t() / 2;
    const double t = b.t_grid[it];
    CHECK(b.grid_index(t) == static_cast<long>(it));
    CHECK(b.grid_index(t + 7.3) == -1);
    CHECK(b.scalar_at(b.gamma_r, t) == doctest::Approx(b.gamma_r[it]).epsilon(1e-14));
    CHECK(b.field_at(b.T[1], 10, t) == doctest::Approx(b.T[1][b.idx(it, 10)]).epsilon(1e-14));
    const auto col = b.field_column(b.T[0], t);
    REQUIRE(col.size() == b.n_sigma());
    CHECK(col[17] == doctest::Approx(b.T[0][b.idx(it, 17)]).epsilon(1e-14));
}

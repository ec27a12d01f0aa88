#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vgf/kernel.hpp"
#include "vgf/numeric.hpp"
#include "vgf/verify.hpp"

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

/// Constant-coefficient tables with diagonal reaction A = diag(a_1, a_2) and
/// no ODE/source coupling; lambda_1 < lambda_2 deliberately.
ExtendedSystemMatrices synthetic(std::size_t n_t, std::size_t n_sigma, double a_1, double a_2) {
    ExtendedSystemMatrices m;
    m.t_grid = linspace(0.0, 3600.0, n_t);
    m.sigma_grid = linspace(0.0, 1.0, n_sigma);
    for (int ph : {0, 1}) {
        m.lambda[ph].assign(n_t, ph == 0 ? 1.0e-4 : 2.3e-4);
        m.b_check[ph].assign(n_t, 0.0);
        m.q_check[ph].assign(n_t, 1.0);
        m.p_check[ph].assign(n_t, 0.0);
        m.s_hat[ph].assign(n_t, ph == 0 ? 0.0 : 1.0);
        m.a_check[ph].assign(n_t * n_sigma, ph == 0 ? a_1 : a_2);
        m.r_check[ph].assign(n_t * n_sigma, 0.0);
        for (int j : {0, 1}) m.c_check[ph][j].assign(n_t * n_sigma, 0.0);
    }
    m.d.assign(n_t, 0.0);
    return m;
}

/// Decoupling solution with N identically zero (no ODE coupling).
DecouplingSolution zero_decoupling(const ExtendedSystemMatrices& m) {
    DecouplingSolution sol;
    sol.t_grid = m.t_grid;
    sol.truncation = 2;
    sol.F_bar = Eigen::Matrix2d::Zero();
    sol.L.assign(3, std::vector<Eigen::Matrix2d>(m.t_grid.size(), Eigen::Matrix2d::Zero()));
    return sol;
}

struct Pipeline {
    MaterialParams params = gaas();
    GeometryParams geo;
    ReferenceBundle bundle;
    ExtendedSystemMatrices matrices;
    DecouplingSolution dec;

    Pipeline() {
        ScenarioSpec sc;
        sc.duration = 2.0 * 3600;
        sc.ramp_up_start = 600.0;
        sc.ramp_up_end = 3000.0;
        sc.ramp_down_start = 4200.0;
        sc.ramp_down_end = 6600.0;
        FlatOutputTrajectory flat(sc, geo);
        bundle = build_references(flat, params, geo, 41, 60.0, 16);
        const LinearizedCoefficients coeffs = assemble_coefficients(bundle, params, geo);
        matrices = assemble_extended(hopf_cole(coeffs), coeffs);
        Eigen::Matrix2d F_bar;
        F_bar << -2e-4, 0.0, 0.0, -2e-4;
        dec = solve_decoupling(matrices, choose_gain(matrices, F_bar), 20);
    }
};

double sup_K(const KernelSnapshot& s) {
    double m = 0.0;
    for (const auto& ch : s.K_tri)
        for (double v : ch) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("zero data admits the zero kernel") {
    const auto m = synthetic(9, 41, 0.0, 0.0);
    const auto dec = zero_decoupling(m);
    TargetParams target;
    target.mu = {0.0, 0.0};
    const KernelSnapshot snap = solve_kernel_quasistatic(m, dec, target, 1800.0, 41);
    CHECK(sup_K(snap) < 1e-12);
    for (const auto& ch : snap.D)
        for (double v : ch) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("diagonal constant coefficients reproduce the Bessel-series kernel") {
    // a_2 + mu_2 < 0 exercises the oscillatory branch of the closed form
    const double a_1 = 2e-4, a_2 = -1e-3;
    const auto m = synthetic(9, 201, a_1, a_2);
    const auto dec = zero_decoupling(m);
    TargetParams target;  // mu = 3e-4 on both channels
    const KernelSnapshot snap = solve_kernel_quasistatic(m, dec, target, 1800.0, 201);

    double worst = 0.0, off = 0.0;
    for (std::size_t is = 0; is < snap.n_sigma(); ++is) {
        for (std::size_t iz = 0; iz <= is; ++iz) {
            const Eigen::Matrix2d K = snap.K_at(is, iz);
            const double x = snap.sigma_grid[is], y = snap.sigma_grid[iz];
            worst = std::max(
                worst, std::abs(K(0, 0) - vgf::testing::scalar_kernel_bessel(
                                              x, y, a_1 + target.mu[0], m.lambda[0][0])));
            worst = std::max(
                worst, std::abs(K(1, 1) - vgf::testing::scalar_kernel_bessel(
                                              x, y, a_2 + target.mu[1], m.lambda[1][0])));
            off = std::max(off, std::max(std::abs(K(0, 1)), std::abs(K(1, 0))));
        }
    }
    CHECK(worst < 1e-6);
    CHECK(off < 1e-10);
}

TEST_CASE("growth-scenario kernel structure and residual") {
    Pipeline pl;
    TargetParams target;
    const double t = 3600.0;
    const KernelSnapshot snap = solve_kernel_quasistatic(pl.matrices, pl.dec, target, t, 101);

    CHECK(kernel_residual(pl.matrices, snap, target) < 1e-3);

    // commutation condition: K(sigma, sigma) stays diagonal
    for (std::size_t is = 0; is < snap.n_sigma(); ++is) {
        CHECK(std::abs(snap.K_diag[1][is]) < 1e-10);
        CHECK(std::abs(snap.K_diag[2][is]) < 1e-10);
    }

    // residual coupling keeps only the element forbidden by the ordering
    REQUIRE(pl.matrices.lambda_ordering(0) == -1);  // lambda_1 < lambda_2
    for (std::size_t is = 0; is < snap.n_sigma(); ++is) {
        CHECK(std::abs(snap.D[0][is]) < 1e-12);
        CHECK(std::abs(snap.D[2][is]) < 1e-12);
        CHECK(std::abs(snap.D[3][is]) < 1e-12);
    }

    // diagonal trace identity against direct quadrature of a_check + mu:
    // K_ii(sigma, sigma) = K_ii(0, 0) - int_0^sigma (a_ii + mu_i) / (2 lambda_i)
    double worst = 0.0;
    for (std::size_t is = 1; is < snap.n_sigma(); ++is) {
        const double sigma = snap.sigma_grid[is];
        for (int ph : {0, 1}) {
            const std::size_t ch = ph == 0 ? 0 : 3;
            const double expected = snap.K_diag[ch][0] -
                                    gauss_legendre(
                                        [&](double z) {
                                            return pl.matrices.A(z, t)(ph, ph) + target.mu[ph];
                                        },
                                        0.0, sigma, 32) /
                                        (2.0 * pl.matrices.Lambda(t)(ph, ph));
            const double got = snap.K_diag[ch][is];
            worst = std::max(worst, std::abs(got - expected) / std::max(std::abs(expected), 1e-12));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("kernel is grid-converged at 101 nodes") {
    Pipeline pl;
    TargetParams target;
    const double t = 3600.0;
    const KernelSnapshot a = solve_kernel_quasistatic(pl.matrices, pl.dec, target, t, 101);
    const KernelSnapshot b = solve_kernel_quasistatic(pl.matrices, pl.dec, target, t, 201);

    double diff = 0.0;
    for (std::size_t is = 0; is < a.n_sigma(); ++is)
        for (std::size_t iz = 0; iz <= is; ++iz)
            diff = std::max(diff, (a.K_at(is, iz) - b.K_at(2 * is, 2 * iz)).norm());
    CHECK(diff < 1e-4);
}

TEST_CASE("snapshot interpolation is exact at nodes and accurate between them") {
    Pipeline pl;
    TargetParams target;
    const KernelSet set = build_kernel_set(pl.matrices, pl.dec, target, 5, 101);
    REQUIRE(set.snapshots.size() == 5);

    const KernelSnapshot& mid = set.snapshots[1];
    const KernelSnapshot at_node = set.interpolate(mid.t_k);
    double diff = 0.0;
    for (int e = 0; e < 4; ++e)
        for (std::size_t i = 0; i < mid.K_tri[e].size(); ++i)
            diff = std::max(diff, std::abs(at_node.K_tri[e][i] - mid.K_tri[e][i]));
    CHECK(diff <= 1e-14);

    // between nodes, compare against a fresh solve
    const double t_half = 0.5 * (set.snapshots[0].t_k + set.snapshots[1].t_k);
    const KernelSnapshot interp = set.interpolate(t_half);
    const KernelSnapshot fresh = solve_kernel_quasistatic(pl.matrices, pl.dec, target, t_half, 101);
    double err = 0.0;
    const double scale = sup_K(fresh);
    for (int e = 0; e < 4; ++e)
        for (std::size_t i = 0; i < fresh.K_tri[e].size(); ++i)
            err = std::max(err, std::abs(interp.K_tri[e][i] - fresh.K_tri[e][i]));
    CHECK(err / scale < 5e-2);
}

TEST_CASE("Volterra transformation is the identity for a zero kernel and inverts") {
    const auto m = synthetic(9, 41, 0.0, 0.0);
    const auto dec = zero_decoupling(m);
    TargetParams target;
    target.mu = {0.0, 0.0};
    const KernelSnapshot zero = solve_kernel_quasistatic(m, dec, target, 1800.0, 41);

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::Vector2d> w(41);
    for (auto& v : w) v = Eigen::Vector2d(u(rng), u(rng));

    const auto wt = transform_backstepping(w, zero);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK((wt[i] - w[i]).norm() < 1e-12);

    // a nontrivial kernel: roundtrip and linearity
    const auto m2 = synthetic(9, 41, 3e-4, -6e-4);
    const KernelSnapshot snap = solve_kernel_quasistatic(m2, dec, target, 1800.0, 41);
    const auto fwd = transform_backstepping(w, snap);
    const auto back = invert_backstepping(fwd, snap);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, (back[i] - w[i]).norm());
    CHECK(worst < 1e-10);

    std::vector<Eigen::Vector2d> w2(41), combo(41);
    for (auto& v : w2) v = Eigen::Vector2d(u(rng), u(rng));
    for (std::size_t i = 0; i < 41; ++i) combo[i] = 2.0 * w[i] - 3.0 * w2[i];
    const auto t_combo = transform_backstepping(combo, snap);
    const auto t_w2 = transform_backstepping(w2, snap);
    for (std::size_t i = 0; i < 41; ++i)
        CHECK((t_combo[i] - (2.0 * fwd[i] - 3.0 * t_w2[i])).norm() < 1e-12);
}

TEST_CASE("snapshot sets need two members and clamp queries to their range") {
    const auto m = synthetic(9, 31, 1e-4, -2e-4);
    const auto dec = zero_decoupling(m);
    TargetParams target;
    CHECK_THROWS_AS(build_kernel_set(m, dec, target, 1, 31), SynthesisError);

    const KernelSet set = build_kernel_set(m, dec, target, 2, 31);
    REQUIRE(set.snapshots.size() == 2);
    const KernelSnapshot before = set.interpolate(-500.0);
    const KernelSnapshot after = set.interpolate(1e7);
    for (int e = 0; e < 4; ++e)
        for (std::size_t i = 0; i < before.K_tri[e].size(); ++i) {
            CHECK(before.K_tri[e][i] == set.snapshots.front().K_tri[e][i]);
            CHECK(after.K_tri[e][i] == set.snapshots.back().K_tri[e][i]);
        }
}

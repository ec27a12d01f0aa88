#include "vgf/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vgf/errors.hpp"
#include "vgf/numeric.hpp"

namespace vgf {

LinearizedCoefficients assemble_coefficients(const ReferenceBundle& bundle,
                                             const MaterialParams& params,
                                             const GeometryParams& geometry) {
    LinearizedCoefficients lc;
    lc.t_grid = bundle.t_grid;
    lc.sigma_grid = bundle.sigma_grid;
    const std::size_t nt = lc.n_t(), ns = lc.n_sigma();
    for (int ph = 0; ph < 2; ++ph) {
        for (auto* arr : {&lc.psi[ph], &lc.dpsi_dt[ph], &lc.f[ph], &lc.g[ph], &lc.r[ph]}) {
            arr->assign(nt * ns, 0.0);
        }
        for (auto* arr : {&lc.lambda[ph], &lc.dlambda_dt[ph], &lc.q[ph], &lc.p[ph], &lc.s_hat[ph]}) {
            arr->assign(nt, 0.0);
        }
    }
    lc.d.assign(nt, 0.0);

    for (std::size_t it = 0; it < nt; ++it) {
        const double gamma = bundle.gamma_r[it];
        geometry.require_admissible(gamma);
        const double gdot = bundle.gamma_dot_r[it];
        const double gddot = bundle.gamma_ddot_r[it];
        const double u_r[2] = {bundle.u1_r[it], bundle.u2_r[it]};

        for (int phase = 1; phase <= 2; ++phase) {
            const int ph = phase - 1;
            const double span = geometry.Gamma(phase) - gamma;
            const double alpha = params.alpha(phase);
            const double beta = geometry.beta(phase);
            lc.lambda[ph][it] = alpha / (span * span);
            lc.dlambda_dt[ph][it] = 2.0 * alpha * gdot / (span * span * span);
            lc.q[ph][it] = beta * span / params.k(phase);
            lc.p[ph][it] = -beta * u_r[ph] / params.k(phase);
            lc.s_hat[ph][it] = -beta * params.k(phase) / (params.rho_m * params.q_star * span);
            lc.d[it] += lc.s_hat[ph][it] / span * bundle.dT_dsigma[ph][bundle.idx(it, 0)];
        }
        for (int phase = 1; phase <= 2; ++phase) {
            const int ph = phase - 1;
            const double span = geometry.Gamma(phase) - gamma;
            const double alpha = params.alpha(phase);
            for (std::size_t is = 0; is < ns; ++is) {
                const std::size_t ii = lc.idx(it, is);
                const double sigma = lc.sigma_grid[is];
                const double d1 = bundle.dT_dsigma[ph][ii];
                const double d2 = bundle.d2T_dsigma2[ph][ii];
                lc.psi[ph][ii] = (1.0 - sigma) * gdot / span;
                lc.dpsi_dt[ph][ii] =
                    (1.0 - sigma) * (gddot / span + gdot * gdot / (span * span));
                lc.f[ph][ii] = 2.0 * alpha / (span * span * span) * d2 +
                               (1.0 - sigma) * gdot / (span * span) * d1;
                lc.g[ph][ii] = (1.0 - sigma) / span * d1;
                lc.r[ph][ii] = lc.f[ph][ii] + lc.g[ph][ii] * lc.d[it];
            }
        }
    }
    return lc;
}

HopfColeFactors hopf_cole(const LinearizedCoefficients& lc) {
    HopfColeFactors hc;
    hc.t_grid = lc.t_grid;
    hc.sigma_grid = lc.sigma_grid;
    const std::size_t nt = lc.n_t(), ns = lc.n_sigma();
    const double ds = lc.dsigma();
    for (int ph = 0; ph < 2; ++ph) {
        for (auto* arr : {&hc.h[ph], &hc.dh_dsigma[ph], &hc.d2h_dsigma2[ph], &hc.dh_dt[ph],
                          &hc.a_check[ph], &hc.r_check[ph]}) {
            arr->assign(nt * ns, 0.0);
        }
        hc.c_check[ph][0].assign(nt * ns, 0.0);
        hc.c_check[ph][1].assign(nt * ns, 0.0);
        for (auto* arr : {&hc.b_check[ph], &hc.q_check[ph], &hc.p_check[ph]}) {
            arr->assign(nt, 0.0);
        }
    }

    for (std::size_t it = 0; it < nt; ++it) {
        for (int ph = 0; ph < 2; ++ph) {
            const double lam = lc.lambda[ph][it];
            const double lam_dot = lc.dlambda_dt[ph][it];
            if (!(lam > 0.0)) throw SynthesisError("hopf_cole: lambda must be positive");
            const std::size_t base = lc.idx(it, 0);
            auto psi_at = [&](std::size_t is) { return lc.psi[ph][base + is]; };
            auto dpsi_at = [&](std::size_t is) { return lc.dpsi_dt[ph][base + is]; };
            // psi is linear in sigma, so midpoint = node average makes the
            // composite Simpson exact here.
            auto exponent_node = [&](std::size_t is) { return psi_at(is) / (2.0 * lam); };
            auto exponent_mid = [&](std::size_t is) {
                return 0.5 * (psi_at(is) + psi_at(is + 1)) / (2.0 * lam);
            };
            const auto E = cumsimpson(ns, ds, exponent_node, exponent_mid);
            auto dexp_node = [&](std::size_t is) {
                return dpsi_at(is) / (2.0 * lam) - psi_at(is) * lam_dot / (2.0 * lam * lam);
            };
            auto dexp_mid = [&](std::size_t is) {
                return 0.5 * (dexp_node(is) + dexp_node(is + 1));
            };
            const auto dE_dt = cumsimpson(ns, ds, dexp_node, dexp_mid);
            const double dpsi_dsigma = (psi_at(1) - psi_at(0)) / ds;  // exact: psi linear

            for (std::size_t is = 0; is < ns; ++is) {
                const std::size_t ii = base + is;
                const double h = std::exp(-E[is]);
                const double w = lc.psi[ph][ii] / (2.0 * lam);
                hc.h[ph][ii] = h;
                hc.dh_dsigma[ph][ii] = -w * h;
                hc.d2h_dsigma2[ph][ii] = (w * w - dpsi_dsigma / (2.0 * lam)) * h;
                hc.dh_dt[ph][ii] = -dE_dt[is] * h;
                hc.a_check[ph][ii] = (lam * hc.d2h_dsigma2[ph][ii] +
                                      lc.psi[ph][ii] * hc.dh_dsigma[ph][ii] -
                                      hc.dh_dt[ph][ii]) / h;
                hc.r_check[ph][ii] = lc.r[ph][ii] / h;
                hc.c_check[ph][0][ii] = lc.g[ph][ii] * lc.s_hat[0][it] / h;
                hc.c_check[ph][1][ii] = lc.g[ph][ii] * lc.s_hat[1][it] / h;
            }
            const std::size_t end = base + ns - 1;
            hc.b_check[ph][it] = -hc.dh_dsigma[ph][end] / hc.h[ph][end];
            hc.q_check[ph][it] = lc.q[ph][it] / hc.h[ph][end];
            hc.p_check[ph][it] = lc.p[ph][it] / hc.h[ph][end];
        }
    }
    return hc;
}

std::vector<double> HopfColeFactors::h_column(int phase, double t) const {
    const std::size_t ns = n_sigma(), nt = n_t();
    const double u = (t - t_grid.front()) / dt();
    const std::size_t i0 = std::min(static_cast<std::size_t>(std::max(u, 0.0)), nt - 2);
    const double s = std::clamp(u - static_cast<double>(i0), 0.0, 1.0);
    std::vector<double> col(ns);
    for (std::size_t is = 0; is < ns; ++is) {
        col[is] = (1.0 - s) * h[phase - 1][idx(i0, is)] + s * h[phase - 1][idx(i0 + 1, is)];
    }
    return col;
}

ExtendedSystemMatrices assemble_extended(const HopfColeFactors& hc,
                                         const LinearizedCoefficients& lc) {
    ExtendedSystemMatrices m;
    m.t_grid = lc.t_grid;
    m.sigma_grid = lc.sigma_grid;
    m.lambda = lc.lambda;
    m.s_hat = lc.s_hat;
    m.d = lc.d;
    m.b_check = hc.b_check;
    m.q_check = hc.q_check;
    m.p_check = hc.p_check;
    m.a_check = hc.a_check;
    m.r_check = hc.r_check;
    m.c_check = hc.c_check;

    for (std::size_t it = 0; it < m.n_t(); ++it) {
        for (int ph = 0; ph < 2; ++ph) {
            if (std::abs(m.q_check[ph][it]) < 1e-300) {
                throw SynthesisError("assemble_extended: Q(t) singular at t index " +
                                     std::to_string(it));
            }
        }
        if (std::abs(m.s_hat[1][it]) < 1e-300) {
            throw SynthesisError("assemble_extended: S(t) singular at t index " +
                                 std::to_string(it));
        }
    }
    return m;
}

double ExtendedSystemMatrices::scalar(const std::vector<double>& series, double t) const {
    return interp_linear_uniform(t_grid.front(), dt(), series, t);
}

double ExtendedSystemMatrices::field(const std::vector<double>& table, double sigma,
                                     double t) const {
    const std::size_t nt = n_t(), ns = n_sigma();
    const double u = std::clamp((t - t_grid.front()) / dt(), 0.0, static_cast<double>(nt - 1));
    const std::size_t i0 = std::min(static_cast<std::size_t>(u), nt - 2);
    const double s = u - static_cast<double>(i0);
    auto col = [&](std::size_t it) {
        return interp_cubic_uniform(0.0, dsigma(),
                                    std::span<const double>(table).subspan(idx(it, 0), ns), sigma);
    };
    return (1.0 - s) * col(i0) + s * col(i0 + 1);
}

Eigen::Matrix2d ExtendedSystemMatrices::F(double t) const {
    Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
    out(0, 0) = scalar(d, t);
    return out;
}

Eigen::Matrix2d ExtendedSystemMatrices::S(double t) const {
    Eigen::Matrix2d out;
    out << scalar(s_hat[0], t), scalar(s_hat[1], t), 1.0, 0.0;
    return out;
}

Eigen::Matrix2d ExtendedSystemMatrices::B(double t) const {
    return Eigen::Vector2d(scalar(b_check[0], t), scalar(b_check[1], t)).asDiagonal();
}

Eigen::Matrix2d ExtendedSystemMatrices::P(double t) const {
    Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
    out(0, 0) = scalar(p_check[0], t);
    out(1, 0) = scalar(p_check[1], t);
    return out;
}

Eigen::Matrix2d ExtendedSystemMatrices::Q(double t) const {
    return Eigen::Vector2d(scalar(q_check[0], t), scalar(q_check[1], t)).asDiagonal();
}

Eigen::Matrix2d ExtendedSystemMatrices::Lambda(double t) const {
    return Eigen::Vector2d(scalar(lambda[0], t), scalar(lambda[1], t)).asDiagonal();
}

Eigen::Matrix2d ExtendedSystemMatrices::A(double sigma, double t) const {
    return Eigen::Vector2d(field(a_check[0], sigma, t), field(a_check[1], sigma, t)).asDiagonal();
}

Eigen::Matrix2d ExtendedSystemMatrices::C(double sigma, double t) const {
    Eigen::Matrix2d out;
    out << field(c_check[0][0], sigma, t), field(c_check[0][1], sigma, t),
           field(c_check[1][0], sigma, t), field(c_check[1][1], sigma, t);
    return out;
}

Eigen::Matrix2d ExtendedSystemMatrices::R(double sigma, double t) const {
    Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
    out(0, 0) = field(r_check[0], sigma, t);
    out(1, 0) = field(r_check[1], sigma, t);
    return out;
}

int ExtendedSystemMatrices::lambda_ordering(std::size_t it) const {
    const double l1 = lambda[0][it], l2 = lambda[1][it];
    const double tol = 1e-6 * std::max(l1, l2);
    if (l1 > l2 + tol) return 1;
    if (l2 > l1 + tol) return -1;
    return 0;
}

}  // namespace vgf

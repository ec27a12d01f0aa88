#include "vgf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vgf {

namespace {

Eigen::Matrix2d series_d2(const DecouplingSolution& dec, double sigma, double t) {
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    std::vector<double> fact(static_cast<std::size_t>(dec.truncation) + 1, 1.0);
    for (std::size_t j = 1; j < fact.size(); ++j) fact[j] = fact[j - 1] * static_cast<double>(j);
    for (int j = dec.truncation; j >= 2; --j) {
        acc = sigma * acc;
        acc += dec.L_at(j, t) / fact[static_cast<std::size_t>(j - 2)];
    }
    return acc;
}

}  // namespace

double decoupling_residual(const ExtendedSystemMatrices& matrices, const DecouplingSolution& dec,
                           std::size_t n_sigma_check, std::size_t n_t_check) {
    const std::size_t nt = matrices.n_t();
    const double dt = matrices.dt();
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t kt = 0; kt < n_t_check; ++kt) {
        // interior grid times so the central time difference stays on-grid
        const std::size_t it =
            1 + (kt * (nt - 3)) / (n_t_check > 1 ? n_t_check - 1 : 1);
        const double t = matrices.t_grid[it];
        const Eigen::Matrix2d F_bar = dec.F_bar;
        const Eigen::Matrix2d S = matrices.S(t);
        const Eigen::Matrix2d K = S.inverse() * (matrices.F(t) - F_bar);
        for (std::size_t ks = 0; ks < n_sigma_check; ++ks) {
            const double sigma =
                static_cast<double>(ks + 1) / static_cast<double>(n_sigma_check);
            const Eigen::Matrix2d N = dec.N(sigma, t);
            const Eigen::Matrix2d dN_dt =
                (dec.N(sigma, matrices.t_grid[it + 1]) - dec.N(sigma, matrices.t_grid[it - 1])) /
                (2.0 * dt);
            const Eigen::Matrix2d diff = matrices.Lambda(t) * series_d2(dec, sigma, t);
            const Eigen::Matrix2d reac = matrices.A(sigma, t) * N;
            const Eigen::Matrix2d drift = N * F_bar;
            const Eigen::Matrix2d force = matrices.C(sigma, t) * K - matrices.R(sigma, t);
            const Eigen::Matrix2d res = dN_dt - diff - reac + drift + force;
            worst = std::max(worst, res.cwiseAbs().maxCoeff());
            for (const auto& term : {dN_dt, diff, reac, drift, force}) {
                scale = std::max(scale, term.cwiseAbs().maxCoeff());
            }
        }
    }
    return worst / std::max(scale, 1e-300);
}

double kernel_residual(const ExtendedSystemMatrices& matrices, const KernelSnapshot& snap,
                       const TargetParams& target) {
    const std::size_t ns = snap.n_sigma();
    const double h = snap.dsigma();
    const double t = snap.t_k;

    std::array<std::vector<double>, 2> acol;
    for (std::size_t iz = 0; iz < ns; ++iz) {
        const Eigen::Matrix2d A = matrices.A(static_cast<double>(iz) * h, t);
        acol[0].push_back(A(0, 0));
        acol[1].push_back(A(1, 1));
    }

    double worst_rel = 0.0;
    for (int e = 0; e < 4; ++e) {
        const auto& ch = snap.K_tri[static_cast<std::size_t>(e)];
        const int i = e / 2, j = e % 2;
        const double li = snap.lambda[static_cast<std::size_t>(i)];
        const double lj = snap.lambda[static_cast<std::size_t>(j)];
        const double mu = target.mu[static_cast<std::size_t>(i)];
        const double slope = snap.jump_slope[static_cast<std::size_t>(e)];

        double worst = 0.0, scale = 0.0;
        for (std::size_t is = 3; is + 2 < ns; ++is) {
            for (std::size_t iz = 1; iz + 3 <= is; ++iz) {
                const double sigma = static_cast<double>(is) * h;
                const double zeta = static_cast<double>(iz) * h;
                if (slope > 0.0 && std::abs(zeta - slope * sigma) <= 3.5 * h) continue;
                const double k0 = ch[snap.tri_idx(is, iz)];
                const double kss = (ch[snap.tri_idx(is + 1, iz)] - 2.0 * k0 +
                                    ch[snap.tri_idx(is - 1, iz)]) /
                                   (h * h);
                const double kzz = (ch[snap.tri_idx(is, iz + 1)] - 2.0 * k0 +
                                    ch[snap.tri_idx(is, iz - 1)]) /
                                   (h * h);
                const double reac = (mu + acol[static_cast<std::size_t>(j)][iz]) * k0;
                const double res = li * kss - lj * kzz - reac;
                worst = std::max(worst, std::abs(res));
                scale = std::max({scale, std::abs(li * kss), std::abs(lj * kzz), std::abs(reac)});
            }
        }
        if (scale > 0.0) worst_rel = std::max(worst_rel, worst / scale);
    }
    return worst_rel;
}

}  // namespace vgf

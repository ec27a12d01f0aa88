#include "vgf/decoupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vgf/errors.hpp"

namespace vgf {

namespace {

/// Least-squares fit on a fixed uniform grid over [0, 1] in a Chebyshev basis
/// (well conditioned up to high degree). The QR factorization and the basis
/// change to monomials are computed once and reused for every sample set.
class ChebFitter {
  public:
    ChebFitter(std::size_t n_points, int degree)
        : n_(n_points), degree_(degree), design_(n_points, degree + 1) {
        for (std::size_t i = 0; i < n_points; ++i) {
            const double x = 2.0 * static_cast<double>(i) / static_cast<double>(n_points - 1) - 1.0;
            double tkm1 = 1.0, tk = x;
            design_(i, 0) = 1.0;
            if (degree >= 1) design_(i, 1) = x;
            for (int k = 2; k <= degree; ++k) {
                const double tkp1 = 2.0 * x * tk - tkm1;
                design_(i, k) = tkp1;
                tkm1 = tk;
                tk = tkp1;
            }
        }
        qr_.compute(design_);

        // monomial expansion of T_k(2 sigma - 1) in sigma
        to_monomial_ = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
        Eigen::VectorXd pm1 = Eigen::VectorXd::Zero(degree + 1);
        Eigen::VectorXd p = Eigen::VectorXd::Zero(degree + 1);
        pm1(0) = 1.0;
        to_monomial_.col(0) = pm1;
        if (degree >= 1) {
            p(0) = -1.0;
            p(1) = 2.0;
            to_monomial_.col(1) = p;
        }
        for (int k = 2; k <= degree; ++k) {
            Eigen::VectorXd next = Eigen::VectorXd::Zero(degree + 1);
            for (int j = 0; j + 1 <= degree; ++j) next(j + 1) += 4.0 * p(j);
            next -= 2.0 * p;
            next -= pm1;
            to_monomial_.col(k) = next;
            pm1 = p;
            p = next;
        }
    }

    /// Monomial coefficients c_0..c_degree with p(sigma) = sum c_j sigma^j.
    std::vector<double> fit(std::span<const double> values) const {
        Eigen::Map<const Eigen::VectorXd> rhs(values.data(), static_cast<long>(values.size()));
        const Eigen::VectorXd cheb = qr_.solve(rhs);
        const Eigen::VectorXd mono = to_monomial_ * cheb;
        return std::vector<double>(mono.data(), mono.data() + degree_ + 1);
    }

  private:
    std::size_t n_;
    int degree_;
    Eigen::MatrixXd design_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::MatrixXd to_monomial_;
};

/// d/dt of a uniformly sampled matrix series by sliding local cubic least
/// squares (Savitzky-Golay). The series recursion differentiates its own
/// output several times over, dividing by Lambda each round; a pointwise
/// stencil hands every round a noise gain of ~1/dt and sample-level rounding
/// dust in the coefficient tables compounds into an O(1) floor in the
/// high-order terms. The windowed fit keeps the per-round gain a factor
/// ~W^(3/2) lower, which is what bounds that floor. Short series (tests) fall
/// back to a plain 2nd-order stencil.
std::vector<Eigen::Matrix2d> time_derivative(const std::vector<Eigen::Matrix2d>& f, double dt) {
    const std::size_t n = f.size();
    std::vector<Eigen::Matrix2d> d(n);
    if (n < 5) throw SynthesisError("time grid too short for derivative stencil");
    constexpr int M = 24, W = 2 * M + 1, D = 3;
    if (n < W) {
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
        return d;
    }
    Eigen::MatrixXd X(W, D + 1);
    for (int r = 0; r < W; ++r) {
        double p = 1.0;
        for (int k = 0; k <= D; ++k) {
            X(r, k) = p;
            p *= r;
        }
    }
    const Eigen::MatrixXd G = (X.transpose() * X).ldlt().solve(X.transpose());
    Eigen::MatrixXd DW(W, W);  // row: in-window position the fit is differentiated at
    for (int rel = 0; rel < W; ++rel) {
        Eigen::RowVectorXd dv(D + 1);
        dv << 0.0, 1.0, 2.0 * rel, 3.0 * rel * rel;
        DW.row(rel) = dv * G / dt;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s0 =
            std::min(static_cast<std::size_t>(std::max<long>(0, static_cast<long>(i) - M)), n - W);
        const int rel = static_cast<int>(i - s0);
        Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
        for (int r = 0; r < W; ++r) acc += DW(rel, r) * f[s0 + static_cast<std::size_t>(r)];
        d[i] = acc;
    }
    return d;
}

std::size_t interp_base(const std::vector<double>& t_grid, double t, double* frac) {
    const double dt = t_grid[1] - t_grid[0];
    double u = (t - t_grid.front()) / dt;
    u = std::clamp(u, 0.0, static_cast<double>(t_grid.size() - 1));
    std::size_t i0 = static_cast<std::size_t>(u);
    if (i0 + 1 >= t_grid.size()) i0 = t_grid.size() - 2;
    *frac = u - static_cast<double>(i0);
    return i0;
}

}  // namespace

std::vector<double> polyfit_unit_grid(std::span<const double> values, int degree) {
    if (values.size() < static_cast<std::size_t>(degree) + 1) {
        throw SynthesisError("polyfit_unit_grid: fewer samples than coefficients");
    }
    return ChebFitter(values.size(), degree).fit(values);
}

Eigen::Matrix2d OdeGain::K_at(double t) const {
    double frac = 0.0;
    const std::size_t i0 = interp_base(t_grid, t, &frac);
    return (1.0 - frac) * K[i0] + frac * K[i0 + 1];
}

OdeGain choose_gain(const ExtendedSystemMatrices& matrices, const Eigen::Matrix2d& F_bar) {
    const Eigen::EigenSolver<Eigen::Matrix2d> es(F_bar);
    for (int i = 0; i < 2; ++i) {
        if (!(es.eigenvalues()(i).real() < 0.0)) {
            throw SynthesisError("choose_gain: target matrix is not Hurwitz");
        }
    }
    OdeGain gain;
    gain.F_bar = F_bar;
    gain.t_grid = matrices.t_grid;
    gain.K.resize(matrices.n_t());
    for (std::size_t it = 0; it < matrices.n_t(); ++it) {
        const double t = matrices.t_grid[it];
        const Eigen::Matrix2d S = matrices.S(t);
        if (std::abs(S.determinant()) < 1e-14) {
            throw SynthesisError("choose_gain: singular S(t) at t=" + std::to_string(t));
        }
        gain.K[it] = S.inverse() * (matrices.F(t) - F_bar);
    }
    return gain;
}

Eigen::Matrix2d DecouplingSolution::L_at(int j, double t) const {
    double frac = 0.0;
    const std::size_t i0 = interp_base(t_grid, t, &frac);
    const auto& Lj = L[static_cast<std::size_t>(j)];
    return (1.0 - frac) * Lj[i0] + frac * Lj[i0 + 1];
}

namespace {
std::vector<double> factorials(int top) {
    std::vector<double> f(static_cast<std::size_t>(top) + 1, 1.0);
    for (std::size_t j = 1; j < f.size(); ++j) f[j] = f[j - 1] * static_cast<double>(j);
    return f;
}
}  // namespace

Eigen::Matrix2d DecouplingSolution::N(double sigma, double t) const {
    double frac = 0.0;
    const std::size_t i0 = interp_base(t_grid, t, &frac);
    const auto fact = factorials(truncation);
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    for (int j = truncation; j >= 0; --j) {
        acc = sigma * acc;
        const auto& Lj = L[static_cast<std::size_t>(j)];
        acc += ((1.0 - frac) * Lj[i0] + frac * Lj[i0 + 1]) / fact[static_cast<std::size_t>(j)];
    }
    return acc;
}

Eigen::Matrix2d DecouplingSolution::dN_dsigma(double sigma, double t) const {
    double frac = 0.0;
    const std::size_t i0 = interp_base(t_grid, t, &frac);
    const auto fact = factorials(truncation);
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    for (int j = truncation; j >= 1; --j) {
        acc = sigma * acc;
        const auto& Lj = L[static_cast<std::size_t>(j)];
        acc += ((1.0 - frac) * Lj[i0] + frac * Lj[i0 + 1]) / fact[static_cast<std::size_t>(j - 1)];
    }
    return acc;
}

Eigen::Matrix2d DecouplingSolution::C_bar(const ExtendedSystemMatrices& m, double sigma,
                                          double t) const {
    return m.C(sigma, t) - N(sigma, t) * m.S(t);
}

Eigen::Matrix2d DecouplingSolution::P_bar(const ExtendedSystemMatrices& m, double t) const {
    return m.P(t) + m.B(t) * N(1.0, t) - dN_dsigma(1.0, t);
}

DecouplingSolution solve_decoupling(const ExtendedSystemMatrices& matrices, const OdeGain& gain,
                                    int truncation) {
    const std::size_t nt = matrices.n_t();
    const std::size_t ns = matrices.n_sigma();
    const int J = truncation;
    if (J < 2) throw SynthesisError("solve_decoupling: truncation must be at least 2");

    // sigma power-series coefficients (X_j with X = sum X_j sigma^j / j!) of
    // the sigma-dependent coefficient matrices, per time sample
    ChebFitter fitter(ns, J);
    std::vector<std::vector<Eigen::Matrix2d>> Aj(static_cast<std::size_t>(J) + 1),
        Cj(static_cast<std::size_t>(J) + 1), Rj(static_cast<std::size_t>(J) + 1);
    for (auto* tab : {&Aj, &Cj, &Rj}) {
        for (auto& row : *tab) row.assign(nt, Eigen::Matrix2d::Zero());
    }
    std::vector<double> fact(static_cast<std::size_t>(J) + 1, 1.0);
    for (std::size_t j = 1; j < fact.size(); ++j) fact[j] = fact[j - 1] * static_cast<double>(j);

    std::vector<double> column(ns);
    for (std::size_t it = 0; it < nt; ++it) {
        auto fit_into = [&](const std::vector<double>& table, auto assign) {
            for (std::size_t is = 0; is < ns; ++is) column[is] = table[matrices.idx(it, is)];
            const auto mono = fitter.fit(column);
            for (int j = 0; j <= J; ++j) {
                assign(j, mono[static_cast<std::size_t>(j)] * fact[static_cast<std::size_t>(j)]);
            }
        };
        for (int i = 0; i < 2; ++i) {
            fit_into(matrices.a_check[static_cast<std::size_t>(i)],
                     [&](int j, double v) { Aj[static_cast<std::size_t>(j)][it](i, i) = v; });
            fit_into(matrices.r_check[static_cast<std::size_t>(i)],
                     [&](int j, double v) { Rj[static_cast<std::size_t>(j)][it](i, 0) = v; });
            for (int l = 0; l < 2; ++l) {
                fit_into(matrices.c_check[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)],
                         [&](int j, double v) { Cj[static_cast<std::size_t>(j)][it](i, l) = v; });
            }
        }
    }

    std::vector<std::vector<double>> binom(static_cast<std::size_t>(J) + 1);
    for (std::size_t j = 0; j < binom.size(); ++j) {
        binom[j].assign(j + 1, 1.0);
        for (std::size_t m = 1; m < j; ++m) binom[j][m] = binom[j - 1][m - 1] + binom[j - 1][m];
    }

    DecouplingSolution sol;
    sol.t_grid = matrices.t_grid;
    sol.truncation = J;
    sol.F_bar = gain.F_bar;
    sol.L.assign(static_cast<std::size_t>(J) + 1, std::vector<Eigen::Matrix2d>(nt));
    for (std::size_t it = 0; it < nt; ++it) {
        sol.L[0][it] = Eigen::Matrix2d::Zero();
        sol.L[1][it] = -gain.K[it];
    }

    const double dt = matrices.dt();
    for (int j = 0; j + 2 <= J; ++j) {
        const auto Ldot = time_derivative(sol.L[static_cast<std::size_t>(j)], dt);
        double norm_j = 0.0, norm_next = 0.0;
        for (std::size_t it = 0; it < nt; ++it) {
            const double t = matrices.t_grid[it];
            Eigen::Matrix2d rhs = Ldot[it];
            for (int m = 0; m <= j; ++m) {
                rhs -= binom[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] *
                       Aj[static_cast<std::size_t>(j - m)][it] * sol.L[static_cast<std::size_t>(m)][it];
            }
            rhs += sol.L[static_cast<std::size_t>(j)][it] * gain.F_bar;
            rhs += Cj[static_cast<std::size_t>(j)][it] * gain.K[it];
            rhs -= Rj[static_cast<std::size_t>(j)][it];
            const Eigen::Matrix2d Lambda = matrices.Lambda(t);
            Eigen::Matrix2d next;
            next.row(0) = rhs.row(0) / Lambda(0, 0);
            next.row(1) = rhs.row(1) / Lambda(1, 1);
            sol.L[static_cast<std::size_t>(j) + 2][it] = next;
            norm_j += sol.L[static_cast<std::size_t>(j)][it].norm() / fact[static_cast<std::size_t>(j)];
            norm_next += next.norm() / fact[static_cast<std::size_t>(j) + 2];
        }
        // Factorial normalization keeps a convergent series bounded in j; a
        // sustained blow-up means the recursion diverged for this truncation.
        if (j >= 10 && norm_j > 1e-12 && norm_next / norm_j > 50.0) {
            throw SynthesisError("solve_decoupling: power-series recursion diverges at order " +
                                 std::to_string(j + 2) +
                                 " (growth " + std::to_string(norm_next / norm_j) +
                                 "); reduce the truncation order");
        }
    }

    // The recursion amplifies time-derivative discretization noise by
    // Lambda^{-1} every second order, so the computed series behaves like an
    // asymptotic one: normalized norms decay to a noise floor, then grow
    // geometrically. Truncate at the floor (classical optimal truncation);
    // orders beyond it carry no information.
    if (J >= 8) {
        std::vector<double> nrm(static_cast<std::size_t>(J) + 1, 0.0);
        for (int j = 0; j <= J; ++j) {
            for (std::size_t it = 0; it < nt; ++it) {
                nrm[static_cast<std::size_t>(j)] =
                    std::max(nrm[static_cast<std::size_t>(j)],
                             sol.L[static_cast<std::size_t>(j)][it].norm() /
                                 fact[static_cast<std::size_t>(j)]);
            }
        }
        int best = J - 1;
        double best_val = std::numeric_limits<double>::max();
        for (int j = 4; j + 1 <= J; ++j) {
            const double pair = std::max(nrm[static_cast<std::size_t>(j)],
                                         nrm[static_cast<std::size_t>(j) + 1]);
            if (pair < best_val) {
                best_val = pair;
                best = j;
            }
        }
        if (best + 1 < J) {
            sol.truncation = best + 1;
            sol.L.resize(static_cast<std::size_t>(best) + 2);
        }
    }

    return sol;
}

std::vector<Eigen::Vector2d> apply_decoupling(const std::vector<Eigen::Vector2d>& w,
                                              const Eigen::Vector2d& x,
                                              const DecouplingSolution& sol, double t) {
    const std::size_t ns = w.size();
    std::vector<Eigen::Vector2d> out(ns);
    for (std::size_t is = 0; is < ns; ++is) {
        const double sigma = static_cast<double>(is) / static_cast<double>(ns - 1);
        out[is] = w[is] - sol.N(sigma, t) * x;
    }
    return out;
}

std::vector<Eigen::Vector2d> invert_decoupling(const std::vector<Eigen::Vector2d>& w_tilde,
                                               const Eigen::Vector2d& x,
                                               const DecouplingSolution& sol, double t) {
    const std::size_t ns = w_tilde.size();
    std::vector<Eigen::Vector2d> out(ns);
    for (std::size_t is = 0; is < ns; ++is) {
        const double sigma = static_cast<double>(is) / static_cast<double>(ns - 1);
        out[is] = w_tilde[is] + sol.N(sigma, t) * x;
    }
    return out;
}

}  // namespace vgf

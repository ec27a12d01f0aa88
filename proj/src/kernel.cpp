#include "vgf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vgf/errors.hpp"
#include "vgf/numeric.hpp"

namespace vgf {
namespace {

void lagrange4_weights(double x, double w[4]) {
    w[0] = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    w[1] = x * (x - 2.0) * (x - 3.0) / 2.0;
    w[2] = -x * (x - 1.0) * (x - 3.0) / 2.0;
    w[3] = x * (x - 1.0) * (x - 2.0) / 6.0;
}

/// Polynomial on [0, hi] in the shifted Chebyshev basis, evaluated by Clenshaw
/// recurrence. The lattice boundary data and reaction coefficients are carried
/// as these instead of tables: piecewise-cubic table interpolation has
/// curvature kinks at the knots, and those kinks survive lattice refinement
/// and dominate finite-difference residuals of the sampled kernel. (Monomial
/// form would lose ~8 digits to cancellation at the degrees involved.)
struct ChebPoly {
    std::vector<double> c;
    double hi = 1.0;
    double operator()(double x) const {
        const double t = 2.0 * x / hi - 1.0;
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t j = c.size(); j-- > 1;) {
            const double b0 = 2.0 * t * b1 - b2 + c[j];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c[0];
    }
};

ChebPoly fit_cheb(const std::vector<double>& tab, int degree) {
    const std::size_t n = tab.size();
    const int d = std::min<int>(degree, static_cast<int>(n) - 1);
    Eigen::MatrixXd V(n, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
        V(i, 0) = 1.0;
        if (d >= 1) V(i, 1) = t;
        for (int k = 2; k <= d; ++k) V(i, k) = 2.0 * t * V(i, k - 1) - V(i, k - 2);
    }
    const Eigen::Map<const Eigen::VectorXd> rhs(tab.data(), static_cast<long>(n));
    const Eigen::VectorXd sol = V.householderQr().solve(rhs);
    return ChebPoly{std::vector<double>(sol.data(), sol.data() + d + 1), 1.0};
}

std::vector<double> cheb_nodes(double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        x[static_cast<std::size_t>(k)] =
            hi * 0.5 * (std::cos(std::numbers::pi * (k + 0.5) / n) + 1.0);
    }
    return x;
}

/// Chebyshev interpolant through values sampled at cheb_nodes(hi, n).
ChebPoly cheb_from_values(const std::vector<double>& fv, double hi) {
    const int n = static_cast<int>(fv.size());
    std::vector<double> c(fv.size(), 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            acc += fv[static_cast<std::size_t>(k)] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
        }
        c[static_cast<std::size_t>(j)] = 2.0 * acc / n;
    }
    c[0] *= 0.5;
    return ChebPoly{std::move(c), hi};
}

template <typename F>
ChebPoly cheb_interp(F&& f, double hi, int n) {
    const auto xs = cheb_nodes(hi, n);
    std::vector<double> fv(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) fv[k] = f(xs[k]);
    return cheb_from_values(fv, hi);
}

/// Antiderivative vanishing at x = 0, via the Chebyshev recurrence
/// int T_j = (T_{j+1}/(j+1) - T_{j-1}/(j-1)) / 2.
ChebPoly cheb_antiderivative(const ChebPoly& f) {
    const std::size_t n = f.c.size();
    std::vector<double> d(n + 1, 0.0);
    auto cf = [&](std::size_t j) { return j < n ? f.c[j] : 0.0; };
    d[1] = cf(0) - 0.5 * cf(2);
    for (std::size_t j = 2; j <= n; ++j) d[j] = (cf(j - 1) - cf(j + 1)) / (2.0 * j);
    const double scale = 0.5 * f.hi;
    double at0 = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        d[j] *= scale;
        at0 += (j % 2 == 0) ? d[j] : -d[j];
    }
    d[0] = -at0;
    return ChebPoly{std::move(d), f.hi};
}

/// Evaluate p at x, continuing past the right end of its domain by quintic
/// Lagrange extrapolation through samples just inside it. Direct evaluation
/// of a high-degree Chebyshev interpolant outside its interval explodes;
/// accuracy of the extension is only needed a couple of lattice cells past
/// the end, where the sampling windows of boundary rows still reach.
double eval_ext(const ChebPoly& p, double x) {
    if (x <= p.hi) return p(x);
    const double d = 0.02 * p.hi;
    double acc = 0.0;
    for (int k = 0; k < 6; ++k) {
        const double xk = p.hi - k * d;
        double w = 1.0;
        for (int l = 0; l < 6; ++l) {
            if (l == k) continue;
            const double xl = p.hi - l * d;
            w *= (x - xl) / (xk - xl);
        }
        acc += w * p(xk);
    }
    return acc;
}

constexpr double kGlx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975363};
constexpr double kGlw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

/// Goursat problem 4 k_mn = q k on the characteristic lattice
/// m = sigma/a + zeta/b, n = sigma/a - zeta/b, with data on the rows n = 0
/// (psi0, function of m) and n = m (psi1, function of n). Solved as the
/// integral equation k = data + (1/4) (S(m,n) - S(n,n)) with
/// S(m,n) = int_0^m int_0^n q k, by successive approximation.
/// The lattice extends three rows past n = m so that cubic sampling near
/// zeta = 0 stays inside solved nodes.
struct GoursatLattice {
    int P = 0;
    double h = 0.0;
    double a = 0.0, b = 0.0;
    int Smax = 0;
    std::vector<double> q_tab, k, data, f, A, S;

    void init(double a_, double b_, int P_, double ext) {
        a = a_;
        b = b_;
        P = P_;
        if (P < 8) throw SynthesisError("kernel lattice too coarse");
        const double m_max = 1.0 / a + 1.0 / b;
        h = m_max / P;
        // cover sigma up to ext (past 1) so cubic sampling windows and the
        // boundary-data rows never touch unsolved nodes
        Smax = std::min(static_cast<int>(std::floor(2.0 * ext / (a * h))) + 8, 2 * P);
        const std::size_t sz = static_cast<std::size_t>(P + 1) * (P + 1);
        q_tab.assign(sz, 0.0);
        k.assign(sz, 0.0);
        data.assign(sz, 0.0);
        f.assign(sz, 0.0);
        A.assign(sz, 0.0);
        S.assign(sz, 0.0);
    }

    bool in_domain(int p, int q) const {
        return q <= p + 3 && q <= P && p <= P && p + q <= Smax;
    }
    std::size_t at(int p, int q) const {
        return static_cast<std::size_t>(p) * (P + 1) + static_cast<std::size_t>(q);
    }

    template <typename QFn>
    void fill_reaction(QFn&& qfun) {
        for (int p = 0; p <= P; ++p) {
            for (int q = 0; q <= std::min(p + 3, P); ++q) {
                if (p + q > Smax) break;
                const double m = p * h, n = q * h;
                q_tab[at(p, q)] = qfun(m, n);
            }
        }
    }

    template <typename Psi0, typename Psi1>
    void fill_data(Psi0&& psi0, Psi1&& psi1) {
        std::vector<double> p0(static_cast<std::size_t>(P) + 1), p1(p0.size());
        for (int q = 0; q <= P; ++q) {
            p0[static_cast<std::size_t>(q)] = psi0(q * h);
            p1[static_cast<std::size_t>(q)] = psi1(q * h);
        }
        for (int p = 0; p <= P; ++p) {
            for (int q = 0; q <= std::min(p + 3, P); ++q) {
                if (p + q > Smax) break;
                data[at(p, q)] = p0[static_cast<std::size_t>(p)] +
                                 p1[static_cast<std::size_t>(q)] - p0[static_cast<std::size_t>(q)];
            }
        }
    }

    int iterate(int max_sweeps, double tol) {
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            for (int p = 0; p <= P; ++p) {
                for (int q = 0; q <= P; ++q) {
                    const std::size_t ii = at(p, q);
                    f[ii] = in_domain(p, q) ? q_tab[ii] * k[ii] : 0.0;
                }
            }
            // S(p,q) = int_0^{m_p} int_0^{n_q} f by nested cumulative trapezoids
            for (int q = 0; q <= P; ++q) {
                A[at(0, q)] = 0.0;
                for (int p = 1; p <= P; ++p) {
                    A[at(p, q)] = A[at(p - 1, q)] + 0.5 * h * (f[at(p - 1, q)] + f[at(p, q)]);
                }
            }
            for (int p = 0; p <= P; ++p) {
                S[at(p, 0)] = 0.0;
                for (int q = 1; q <= P; ++q) {
                    S[at(p, q)] = S[at(p, q - 1)] + 0.5 * h * (A[at(p, q - 1)] + A[at(p, q)]);
                }
            }
            double diff = 0.0, scale = 1.0;
            for (int p = 0; p <= P; ++p) {
                for (int q = 0; q <= std::min(p + 3, P); ++q) {
                    if (p + q > Smax) break;
                    const std::size_t ii = at(p, q);
                    const double next = data[ii] + 0.25 * (S[ii] - S[at(q, q)]);
                    diff = std::max(diff, std::abs(next - k[ii]));
                    scale = std::max(scale, std::abs(next));
                    k[ii] = next;
                }
            }
            if (diff < tol * scale) return sweep + 1;
        }
        throw SynthesisError("kernel successive approximation did not converge within " +
                             std::to_string(max_sweeps) + " sweeps");
    }

    /// Cubic sample at continuous lattice coordinates (m, n), n >= 0.
    double sample(double m, double n) const {
        const double um = m / h, un = n / h;
        long mb = static_cast<long>(std::floor(um)) - 1;
        long nb = static_cast<long>(std::floor(un)) - 1;
        mb = std::clamp(mb, 0L, static_cast<long>(P) - 3);
        nb = std::clamp(nb, 0L, static_cast<long>(P) - 3);
        if (nb > mb) nb = mb;  // keep the window inside the solved wedge
        double wm[4], wn[4];
        lagrange4_weights(um - static_cast<double>(mb), wm);
        lagrange4_weights(un - static_cast<double>(nb), wn);
        double acc = 0.0;
        for (int r = 0; r < 4; ++r) {
            const std::size_t row = at(static_cast<int>(mb) + r, static_cast<int>(nb));
            acc += wm[r] * (wn[0] * k[row] + wn[1] * k[row + 1] + wn[2] * k[row + 2] +
                            wn[3] * k[row + 3]);
        }
        return acc;
    }
};

struct ElementProblem {
    int i = 1, j = 1;       // 1-based row/column
    bool solved = false;    // lattice solve vs identically zero
    bool has_bc = false;    // boundary condition at zeta = 0 imposed
    bool diagonal = false;
    double slope = -1.0;    // discontinuity ray zeta = slope * sigma, < 0 if none
    GoursatLattice lat;
    std::vector<double> phi_b;  // k(sigma, 0) on the sigma grid
    std::vector<double> phi_d;  // k(sigma, sigma) on the sigma grid (diagonal)
};

/// Per-node 2x2 quadrature coefficients of row is of the Volterra integral
/// int_0^{sigma_is} K(sigma_is, zeta) f(zeta) dzeta, trapezoid with a
/// correction for the discontinuity ray of off-diagonal elements.
std::vector<Eigen::Matrix2d> row_coeffs(const KernelSnapshot& snap, std::size_t is) {
    std::vector<Eigen::Matrix2d> c(is + 1, Eigen::Matrix2d::Zero());
    if (is == 0) return c;
    const double h = snap.dsigma();
    for (std::size_t iz = 0; iz <= is; ++iz) {
        const double w = (iz == 0 || iz == is) ? 0.5 * h : h;
        c[iz] = w * snap.K_at(is, iz);
    }
    for (int e = 0; e < 4; ++e) {
        const double slope = snap.jump_slope[static_cast<std::size_t>(e)];
        if (slope <= 0.0) continue;
        const double sigma = snap.sigma_grid[is];
        const double zeta_star = slope * sigma;
        const std::size_t il = static_cast<std::size_t>(std::floor(zeta_star / h));
        if (il >= is) continue;
        // trapezoid treats the cell holding the jump as decaying to the
        // stored zero; restore the area up to the actual ray position
        const double g = snap.K_tri[static_cast<std::size_t>(e)][snap.tri_idx(is, il)];
        c[il](e / 2, e % 2) += g * (zeta_star - static_cast<double>(il) * h - 0.5 * h);
    }
    return c;
}

}  // namespace

Eigen::Matrix2d KernelSnapshot::K_at(std::size_t is, std::size_t iz) const {
    const std::size_t ii = tri_idx(is, iz);
    Eigen::Matrix2d m;
    m(0, 0) = K_tri[0][ii];
    m(0, 1) = K_tri[1][ii];
    m(1, 0) = K_tri[2][ii];
    m(1, 1) = K_tri[3][ii];
    return m;
}

Eigen::Vector2d KernelSnapshot::row_integral(std::size_t is,
                                             const std::vector<Eigen::Vector2d>& f) const {
    const auto c = row_coeffs(*this, is);
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (std::size_t iz = 0; iz <= is; ++iz) acc += c[iz] * f[iz];
    return acc;
}

KernelSnapshot solve_kernel_quasistatic(const ExtendedSystemMatrices& matrices,
                                        const DecouplingSolution& dec, const TargetParams& target,
                                        double t, std::size_t n_sigma) {
    const std::size_t ns = n_sigma;
    if (ns < 5) throw SynthesisError("solve_kernel_quasistatic: sigma grid too coarse");
    const double hs = 1.0 / static_cast<double>(ns - 1);
    const std::size_t tri_size = ns * (ns + 1) / 2;

    const Eigen::Matrix2d Lam = matrices.Lambda(t);
    const std::array<double, 2> lam = {Lam(0, 0), Lam(1, 1)};

    // reaction coefficients on the sigma grid
    std::array<std::vector<double>, 2> acol;
    for (std::size_t is = 0; is < ns; ++is) {
        const double sigma = static_cast<double>(is) * hs;
        const Eigen::Matrix2d A = matrices.A(sigma, t);
        acol[0].push_back(A(0, 0));
        acol[1].push_back(A(1, 1));
    }

    std::array<ElementProblem, 4> elems;
    const double lam_tol = 1e-9 * std::max(lam[0], lam[1]);
    const int P = target.lattice_factor * static_cast<int>(ns - 1);
    for (int e = 0; e < 4; ++e) {
        ElementProblem& el = elems[static_cast<std::size_t>(e)];
        el.i = e / 2 + 1;
        el.j = e % 2 + 1;
        el.diagonal = (el.i == el.j);
        const double li = lam[static_cast<std::size_t>(el.i - 1)];
        const double lj = lam[static_cast<std::size_t>(el.j - 1)];
        if (el.diagonal) {
            el.solved = true;
            el.has_bc = (target.bc_mode == KernelBcMode::Triangular);
        } else if (std::abs(li - lj) <= lam_tol) {
            el.solved = true;
            el.has_bc = true;
        } else {
            el.solved = (li > lj);
            el.has_bc = el.solved;
            if (el.solved) el.slope = std::sqrt(lj / li);
        }
    }
    // all boundary data and coupling integrals are evaluated on [0, ext],
    // slightly past sigma = 1, so the characteristic data rows reachable from
    // the physical triangle never hit an argument clamp
    double ext = 1.0;
    for (int e = 0; e < 4; ++e) {
        ElementProblem& el = elems[static_cast<std::size_t>(e)];
        if (!el.solved) continue;
        const double a = std::sqrt(lam[static_cast<std::size_t>(el.i - 1)]);
        const double b = std::sqrt(lam[static_cast<std::size_t>(el.j - 1)]);
        ext = std::max(ext, 1.0 + 8.0 * a * (1.0 / a + 1.0 / b) / P);
    }
    for (int e = 0; e < 4; ++e) {
        ElementProblem& el = elems[static_cast<std::size_t>(e)];
        if (!el.solved) continue;
        const double li = lam[static_cast<std::size_t>(el.i - 1)];
        const double lj = lam[static_cast<std::size_t>(el.j - 1)];
        el.lat.init(std::sqrt(li), std::sqrt(lj), P, ext);
        const ChebPoly aj = fit_cheb(acol[static_cast<std::size_t>(el.j - 1)], 20);
        const double mu = target.mu[static_cast<std::size_t>(el.i - 1)];
        el.lat.fill_reaction([&](double m, double n) {
            const double zeta = 0.5 * el.lat.b * (m - n);
            return mu + aj(zeta);
        });
    }

    // diagonal trace integrals G_i(sigma) = int_0^sigma (a_i + mu_i) / (2 lambda_i)
    std::array<ChebPoly, 2> G;
    for (int i = 0; i < 2; ++i) {
        const double mu = target.mu[static_cast<std::size_t>(i)];
        const double den = 2.0 * lam[static_cast<std::size_t>(i)];
        // the reaction coefficient is only piecewise smooth in sigma (cubic
        // table interpolation), so the fit converges algebraically; 160 nodes
        // keep the trace identity below 1e-8
        G[static_cast<std::size_t>(i)] = cheb_antiderivative(cheb_interp(
            [&](double s) { return (matrices.A(s, t)(i, i) + mu) / den; }, 1.0, 160));
    }

    KernelSnapshot snap;
    snap.t_k = t;
    snap.sigma_grid = linspace(0.0, 1.0, ns);
    snap.lambda = lam;
    for (int e = 0; e < 4; ++e) {
        snap.jump_slope[static_cast<std::size_t>(e)] = elems[static_cast<std::size_t>(e)].slope;
    }
    for (auto& ch : snap.K_tri) ch.assign(tri_size, 0.0);
    for (auto& ch : snap.D) ch.assign(ns, 0.0);
    for (auto& ch : snap.K_diag) ch.assign(ns, 0.0);
    for (auto& ch : snap.dK1_dsigma) ch.assign(ns, 0.0);

    std::array<std::vector<double>, 4> TcC_used;
    for (auto& ch : TcC_used) ch.assign(ns, 0.0);

    bool converged = false;
    double last_delta = 0.0;
    const int n_cheb = 48;
    const auto cxs = cheb_nodes(1.0, n_cheb);
    for (int outer = 0; outer < target.max_coupling_iters; ++outer) {
        // Volterra image of C_bar under the current kernel iterate, as
        // Chebyshev interpolants in sigma. Each kernel element is analytic on
        // its support (the subcritical off-diagonal vanishes above its ray),
        // so the row integral runs over the smooth branch only and Gauss
        // panels converge fast; the trapezoid row quadrature would leave
        // grid-frequency jitter in the boundary data.
        std::array<ChebPoly, 4> Tc;
        {
            std::array<std::vector<double>, 4> tv;
            for (auto& v : tv) v.assign(cxs.size(), 0.0);
            for (int r = 0; r < 2; ++r) {
                for (std::size_t kx = 0; kx < cxs.size(); ++kx) {
                    const double sigma = cxs[kx];
                    Eigen::Vector2d acc = dec.C_bar(matrices, sigma, t).row(r).transpose();
                    for (int j = 0; j < 2; ++j) {
                        const ElementProblem& ek = elems[static_cast<std::size_t>(2 * r + j)];
                        if (!ek.solved) continue;
                        const double end = (ek.slope > 0.0) ? ek.slope * sigma : sigma;
                        if (end <= 0.0) continue;
                        Eigen::Vector2d s = Eigen::Vector2d::Zero();
                        const double hp = end / 12;
                        for (int p = 0; p < 12; ++p) {
                            const double mid = (p + 0.5) * hp;
                            for (int g = 0; g < 8; ++g) {
                                const double zeta = mid + 0.5 * hp * kGlx[g];
                                const double m = sigma / ek.lat.a + zeta / ek.lat.b;
                                const double n =
                                    std::max(sigma / ek.lat.a - zeta / ek.lat.b, 0.0);
                                s += kGlw[g] * ek.lat.sample(m, n) *
                                     dec.C_bar(matrices, zeta, t).row(j).transpose();
                            }
                        }
                        acc -= 0.5 * hp * s;
                    }
                    tv[static_cast<std::size_t>(2 * r)][kx] = acc(0);
                    tv[static_cast<std::size_t>(2 * r + 1)][kx] = acc(1);
                }
            }
            for (int e = 0; e < 4; ++e) {
                Tc[static_cast<std::size_t>(e)] =
                    cheb_from_values(tv[static_cast<std::size_t>(e)], 1.0);
            }
        }

        double delta = 0.0, scale = 1.0;
        for (int e = 0; e < 4; ++e) {
            ElementProblem& el = elems[static_cast<std::size_t>(e)];
            if (!el.solved) continue;
            const double lj = lam[static_cast<std::size_t>(el.j - 1)];
            const ChebPoly& tce = Tc[static_cast<std::size_t>(e)];
            auto phi_b = [&](double s) { return el.has_bc ? -eval_ext(tce, s) / lj : 0.0; };
            const auto& Gi = G[static_cast<std::size_t>(el.i - 1)];
            const double k00 = phi_b(0.0);
            auto phi_d = [&](double s) { return k00 - eval_ext(Gi, s); };

            el.phi_b.assign(ns, 0.0);
            for (std::size_t is = 0; is < ns; ++is) {
                el.phi_b[is] = phi_b(static_cast<double>(is) * hs);
            }
            if (el.diagonal) {
                el.phi_d.assign(ns, 0.0);
                for (std::size_t is = 0; is < ns; ++is) {
                    el.phi_d[is] = phi_d(static_cast<double>(is) * hs);
                }
            }

            const double a = el.lat.a, b = el.lat.b;
            if (el.diagonal) {
                // n = 0 carries the diagonal trace, n = m the zeta = 0 data
                el.lat.fill_data([&](double m) { return phi_d(0.5 * a * m); },
                                 [&](double n) { return phi_b(a * n); });
            } else {
                // constant trace along the characteristic through the corner,
                // fixed by the corner value of the zeta = 0 data
                el.lat.fill_data([&](double) { return k00; },
                                 [&](double n) { return phi_b(a * n); });
            }
            el.lat.iterate(target.max_sweeps, target.sweep_tol);

            auto& ch = snap.K_tri[static_cast<std::size_t>(e)];
            for (std::size_t is = 0; is < ns; ++is) {
                const double sigma = static_cast<double>(is) * hs;
                for (std::size_t iz = 0; iz <= is; ++iz) {
                    const double zeta = static_cast<double>(iz) * hs;
                    double v;
                    if (iz == is && el.diagonal) {
                        v = el.phi_d[is];
                    } else if (iz == is && !el.diagonal) {
                        v = 0.0;
                    } else if (iz == 0) {
                        v = el.phi_b[is];
                    } else {
                        const double m = sigma / a + zeta / b;
                        const double n = sigma / a - zeta / b;
                        v = (n < -1e-12) ? 0.0 : el.lat.sample(m, std::max(n, 0.0));
                    }
                    const std::size_t ii = snap.tri_idx(is, iz);
                    delta = std::max(delta, std::abs(v - ch[ii]));
                    scale = std::max(scale, std::abs(v));
                    ch[ii] = v;
                }
            }
        }
        for (int e = 0; e < 4; ++e) {
            const ChebPoly& tce = Tc[static_cast<std::size_t>(e)];
            for (std::size_t is = 0; is < ns; ++is) {
                TcC_used[static_cast<std::size_t>(e)][is] = tce(static_cast<double>(is) * hs);
            }
        }
        last_delta = delta;
        if (delta < target.coupling_tol * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw SynthesisError("kernel boundary-data iteration did not converge (last change " +
                             std::to_string(last_delta) + ")");
    }

    // residual coupling: entries whose boundary condition was not imposed
    for (int e = 0; e < 4; ++e) {
        const ElementProblem& el = elems[static_cast<std::size_t>(e)];
        if (el.has_bc) continue;
        for (std::size_t is = 0; is < ns; ++is) {
            snap.D[static_cast<std::size_t>(e)][is] = -TcC_used[static_cast<std::size_t>(e)][is];
        }
    }

    for (int e = 0; e < 4; ++e) {
        const ElementProblem& el = elems[static_cast<std::size_t>(e)];
        auto& diag_tr = snap.K_diag[static_cast<std::size_t>(e)];
        if (el.diagonal) diag_tr = el.phi_d;
    }
    snap.K11.setZero();
    snap.K11(0, 0) = snap.K_diag[0].empty() ? 0.0 : snap.K_diag[0].back();
    snap.K11(1, 1) = snap.K_diag[3].empty() ? 0.0 : snap.K_diag[3].back();

    // d/dsigma K(1, zeta) by a one-sided stencil; element rows crossing the
    // discontinuity ray copy the nearest smooth value
    const double delta_s = 0.5 * hs;
    for (int e = 0; e < 4; ++e) {
        const ElementProblem& el = elems[static_cast<std::size_t>(e)];
        auto& out = snap.dK1_dsigma[static_cast<std::size_t>(e)];
        if (!el.solved) continue;
        const double a = el.lat.a, b = el.lat.b;
        std::vector<bool> wedge(ns, false);
        for (std::size_t iz = 0; iz < ns; ++iz) {
            const double zeta = static_cast<double>(iz) * hs;
            double s[3];
            bool crossed = false;
            int sign0 = 0;
            for (int l = 0; l < 3; ++l) {
                const double sigma = 1.0 - static_cast<double>(l) * delta_s;
                const double n = sigma / a - zeta / b;
                const int sgn = (n < -1e-12) ? -1 : 1;
                if (l == 0) sign0 = sgn;
                if (sgn != sign0) crossed = true;
                if (!el.diagonal && n < -1e-12) {
                    s[l] = 0.0;
                } else {
                    const double m = sigma / a + zeta / b;
                    s[l] = el.lat.sample(m, std::max(n, 0.0));
                }
            }
            if (crossed && el.slope > 0.0) {
                wedge[iz] = true;
                continue;
            }
            out[iz] = (3.0 * s[0] - 4.0 * s[1] + s[2]) / (2.0 * delta_s);
        }
        for (std::size_t iz = 0; iz < ns; ++iz) {
            if (!wedge[iz]) continue;
            std::size_t src = iz;
            while (src > 0 && wedge[src]) --src;
            out[iz] = out[src];
        }
        if (el.diagonal) {
            // the sigma stencil leaves the triangle at zeta = 1; recover
            // dK/dsigma there from the diagonal trace derivative minus the
            // one-sided zeta derivative along the top row
            const auto& ch = snap.K_tri[static_cast<std::size_t>(e)];
            const double row[3] = {ch[snap.tri_idx(ns - 1, ns - 3)],
                                   ch[snap.tri_idx(ns - 1, ns - 2)],
                                   ch[snap.tri_idx(ns - 1, ns - 1)]};
            const double dzeta = (3.0 * row[2] - 4.0 * row[1] + row[0]) / (2.0 * hs);
            const double dtrace = gradient_right3(el.phi_d, hs);
            out[ns - 1] = dtrace - dzeta;
        }
    }

    return snap;
}

KernelSnapshot KernelSet::interpolate(double t) const {
    if (snapshots.empty()) throw SynthesisError("KernelSet::interpolate: no snapshots");
    if (snapshots.size() == 1) return snapshots.front();
    const double t0 = snapshots.front().t_k;
    const double dt = snapshots[1].t_k - t0;
    double u = (t - t0) / dt;
    u = std::clamp(u, 0.0, static_cast<double>(snapshots.size() - 1));
    std::size_t i0 = static_cast<std::size_t>(u);
    if (i0 + 1 >= snapshots.size()) i0 = snapshots.size() - 2;
    const double w = u - static_cast<double>(i0);
    const KernelSnapshot& s0 = snapshots[i0];
    const KernelSnapshot& s1 = snapshots[i0 + 1];

    KernelSnapshot out = s0;
    out.t_k = t;
    auto blend = [&](std::vector<double>& dst, const std::vector<double>& b1) {
        for (std::size_t n = 0; n < dst.size(); ++n) dst[n] = (1.0 - w) * dst[n] + w * b1[n];
    };
    for (int e = 0; e < 4; ++e) {
        const std::size_t ue = static_cast<std::size_t>(e);
        blend(out.K_tri[ue], s1.K_tri[ue]);
        blend(out.dK1_dsigma[ue], s1.dK1_dsigma[ue]);
        blend(out.K_diag[ue], s1.K_diag[ue]);
        blend(out.D[ue], s1.D[ue]);
        if (out.jump_slope[ue] > 0.0 && s1.jump_slope[ue] > 0.0) {
            out.jump_slope[ue] = (1.0 - w) * out.jump_slope[ue] + w * s1.jump_slope[ue];
        }
    }
    out.K11 = (1.0 - w) * s0.K11 + w * s1.K11;
    out.lambda[0] = (1.0 - w) * s0.lambda[0] + w * s1.lambda[0];
    out.lambda[1] = (1.0 - w) * s0.lambda[1] + w * s1.lambda[1];
    return out;
}

KernelSet build_kernel_set(const ExtendedSystemMatrices& matrices, const DecouplingSolution& dec,
                           const TargetParams& target, std::size_t n_snapshots,
                           std::size_t n_sigma) {
    if (n_snapshots < 2) throw SynthesisError("build_kernel_set: need at least two snapshots");
    KernelSet set;
    const auto times = linspace(matrices.t_grid.front(), matrices.t_grid.back(), n_snapshots);
    for (const double t : times) {
        set.snapshots.push_back(solve_kernel_quasistatic(matrices, dec, target, t, n_sigma));
    }
    return set;
}

std::vector<Eigen::Vector2d> transform_backstepping(const std::vector<Eigen::Vector2d>& w,
                                                    const KernelSnapshot& snap) {
    const std::size_t ns = snap.n_sigma();
    if (w.size() != ns) throw SynthesisError("transform_backstepping: grid mismatch");
    std::vector<Eigen::Vector2d> out(ns);
    for (std::size_t is = 0; is < ns; ++is) out[is] = w[is] - snap.row_integral(is, w);
    return out;
}

std::vector<Eigen::Vector2d> invert_backstepping(const std::vector<Eigen::Vector2d>& w_target,
                                                 const KernelSnapshot& snap) {
    const std::size_t ns = snap.n_sigma();
    if (w_target.size() != ns) throw SynthesisError("invert_backstepping: grid mismatch");
    std::vector<Eigen::Vector2d> w(ns, Eigen::Vector2d::Zero());
    w[0] = w_target[0];
    for (std::size_t is = 1; is < ns; ++is) {
        const auto c = row_coeffs(snap, is);
        Eigen::Vector2d rhs = w_target[is];
        for (std::size_t iz = 0; iz < is; ++iz) rhs += c[iz] * w[iz];
        const Eigen::Matrix2d M = Eigen::Matrix2d::Identity() - c[is];
        w[is] = M.inverse() * rhs;
    }
    return w;
}

}  // namespace vgf

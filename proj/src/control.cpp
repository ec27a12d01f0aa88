#include "vgf/control.hpp"

#include <cmath>

#include "vgf/errors.hpp"
#include "vgf/numeric.hpp"

namespace vgf {

ErrorPipelineResult error_pipeline(const PlantState& plant, const ReferenceBundle& bundle,
                                   const HopfColeFactors& hc, const DecouplingSolution& dec,
                                   const ControllerState& ctrl, double t) {
    const std::size_t ns = hc.n_sigma();
    const double ds = 1.0 / static_cast<double>(ns - 1);

    std::array<std::vector<double>, 2> v;
    for (int phase = 1; phase <= 2; ++phase) {
        const PhaseField& field = plant.field(phase);
        if (field.nodes() < 3) throw ConfigError("error_pipeline: plant field too coarse");
        std::vector<double> samples = (field.nodes() == ns)
                                          ? field.values
                                          : resample_unit_grid(field.values, ns);
        const std::vector<double> ref = bundle.field_column(bundle.T[phase - 1], t);
        const std::vector<double> h = hc.h_column(phase, t);
        auto& vp = v[phase - 1];
        vp.resize(ns);
        for (std::size_t is = 0; is < ns; ++is) vp[is] = (samples[is] - ref[is]) / h[is];
    }

    ErrorPipelineResult out;
    out.x = Eigen::Vector2d(plant.interface.gamma - bundle.scalar_at(bundle.gamma_r, t),
                            ctrl.epsilon);
    out.grad_error_at_0 = gradient_left3(v[0], ds);

    std::vector<Eigen::Vector2d> w(ns);
    for (std::size_t is = 0; is < ns; ++is) w[is] = Eigen::Vector2d(v[0][is], v[1][is]);
    out.w_tilde_dec = apply_decoupling(w, out.x, dec, t);
    return out;
}

ControlOutput control_law(const std::vector<Eigen::Vector2d>& w_tilde_dec,
                          const Eigen::Vector2d& x, double t, const KernelSet& kernels,
                          const ExtendedSystemMatrices& matrices, const DecouplingSolution& dec,
                          const ReferenceBundle& bundle) {
    const KernelSnapshot snap = kernels.interpolate(t);
    const std::size_t ns = snap.n_sigma();
    if (w_tilde_dec.size() != ns) throw ConfigError("control_law: field/kernel grid mismatch");
    const double h = snap.dsigma();

    ControlOutput out;
    // int_0^1 dK/dsigma(1, zeta) w_tilde(zeta) dzeta, trapezoid with the
    // same discontinuity-ray correction as the kernel row quadrature
    for (std::size_t iz = 0; iz < ns; ++iz) {
        const double w = (iz == 0 || iz + 1 == ns) ? 0.5 * h : h;
        Eigen::Matrix2d dk;
        dk(0, 0) = snap.dK1_dsigma[0][iz];
        dk(0, 1) = snap.dK1_dsigma[1][iz];
        dk(1, 0) = snap.dK1_dsigma[2][iz];
        dk(1, 1) = snap.dK1_dsigma[3][iz];
        out.integral_term += w * dk * w_tilde_dec[iz];
    }
    for (int e = 0; e < 4; ++e) {
        const double slope = snap.jump_slope[static_cast<std::size_t>(e)];
        if (slope <= 0.0 || slope >= 1.0) continue;
        const std::size_t il = static_cast<std::size_t>(std::floor(slope / h));
        if (il + 1 >= ns) continue;
        const double g = snap.dK1_dsigma[static_cast<std::size_t>(e)][il];
        const double corr = g * (slope - static_cast<double>(il) * h - 0.5 * h);
        out.integral_term(e / 2) += corr * w_tilde_dec[il](e % 2);
    }

    out.boundary_term = (snap.K11 - matrices.B(t)) * w_tilde_dec[ns - 1];
    out.ode_term = -dec.P_bar(matrices, t) * x;

    const Eigen::Matrix2d Q = matrices.Q(t);
    if (std::abs(Q(0, 0)) < 1e-300 || std::abs(Q(1, 1)) < 1e-300) {
        throw SynthesisError("control_law: singular input matrix Q(t)");
    }
    const Eigen::Vector2d rhs = out.integral_term + out.boundary_term + out.ode_term;
    out.u_e = Eigen::Vector2d(rhs(0) / Q(0, 0), rhs(1) / Q(1, 1));
    out.u_1 = bundle.scalar_at(bundle.u1_r, t) + out.u_e(0);
    out.u_2 = bundle.scalar_at(bundle.u2_r, t) + out.u_e(1);
    return out;
}

ControllerState integrator_step(const ControllerState& ctrl, double grad_error_at_0, double dt) {
    if (!(dt > 0.0)) throw ConfigError("integrator_step: dt must be positive");
    ControllerState next = ctrl;
    if (ctrl.has_prev) {
        next.epsilon += 0.5 * dt * (ctrl.prev_rate + grad_error_at_0);
    } else {
        next.epsilon += dt * grad_error_at_0;
    }
    next.prev_rate = grad_error_at_0;
    next.has_prev = true;
    return next;
}

}  // namespace vgf

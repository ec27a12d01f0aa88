#include "vgf/gevrey.hpp"

#include <cmath>

#include "vgf/errors.hpp"
#include "vgf/numeric.hpp"

namespace vgf {

GevreyStep::GevreyStep(double order, std::size_t max_order)
    : order_(order), w_(1.0 / (order - 1.0)), max_order_(max_order) {
    if (!(order > 1.0 && order <= 2.0)) {
        throw ConfigError("GevreyStep: order must lie in (1, 2]");
    }
    norm_ = gauss_legendre([this](double tau) { return bump(tau); }, 0.0, 1.0, 64);
}

double GevreyStep::bump(double tau) const {
    if (tau <= 0.0 || tau >= 1.0) return 0.0;
    return std::exp(-std::pow(tau * (1.0 - tau), -w_));
}

Jet GevreyStep::bump_jet(double tau, std::size_t len) const {
    if (tau <= 0.0 || tau >= 1.0) return Jet(len, 0.0);
    Jet t = Jet::variable(len, tau);
    Jet u = t * (-t + 1.0);  // tau (1 - tau)
    return (-u.pow(-w_)).exp();
}

std::vector<double> GevreyStep::eval(double t, double t0, double t1, std::size_t n) const {
    if (!(t0 < t1)) throw ConfigError("GevreyStep::eval: t0 < t1 required");
    if (n > max_order_) {
        throw CapabilityError("GevreyStep: derivative order above configured maximum");
    }
    std::vector<double> out(n + 1, 0.0);
    const double delta = t1 - t0;
    const double tau = (t - t0) / delta;
    if (tau <= 0.0) return out;
    if (tau >= 1.0) {
        out[0] = 1.0;
        return out;
    }
    out[0] = gauss_legendre([this](double s) { return bump(s); }, 0.0, tau, 64) / norm_;
    if (n >= 1) {
        const Jet phi = bump_jet(tau, n);  // coefficients up to order n-1
        double dpow = delta;
        for (std::size_t k = 1; k <= n; ++k) {
            out[k] = phi.derivative(k - 1) / (norm_ * dpow);
            dpow *= delta;
        }
    }
    return out;
}

double GevreyStep::integral(double t, double t0, double t1) const {
    if (!(t0 < t1)) throw ConfigError("GevreyStep::integral: t0 < t1 required");
    const double delta = t1 - t0;
    const double tau = (t - t0) / delta;
    if (tau <= 0.0) return 0.0;
    if (tau >= 1.0) {
        const double full = gauss_legendre(
            [this](double s) { return bump(s) * (1.0 - s); }, 0.0, 1.0, 64) / norm_;
        // integral over the window is delta * (1 - mean position), plus the
        // saturated tail
        return delta * full + (t - t1);
    }
    // integral of S over [0, tau]: integrate by parts onto the bump
    const double s_val = gauss_legendre([this](double s) { return bump(s); }, 0.0, tau, 64) / norm_;
    const double moment = gauss_legendre(
        [this](double s) { return s * bump(s); }, 0.0, tau, 64) / norm_;
    return delta * (tau * s_val - moment);
}

}  // namespace vgf

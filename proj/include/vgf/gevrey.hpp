#ifndef VGF_GEVREY_HPP
#define VGF_GEVREY_HPP

#include <cstddef>
#include <vector>

#include "vgf/jet.hpp"

namespace vgf {

/// Smooth monotone step of finite Gevrey order, built from the normalized
/// integral of the bump exp(-1/(tau (1-tau))^w) with w = 1/(order-1).
///
/// All derivatives vanish at both ends of the transition window, which is
/// what makes the flatness series converge.
class GevreyStep {
  public:
    explicit GevreyStep(double order, std::size_t max_order = 14);

    double order() const { return order_; }
    std::size_t max_order() const { return max_order_; }

    /// Bump integrand at normalized time tau in [0,1] (0 outside).
    double bump(double tau) const;
    /// Taylor jet of the bump at tau with `len` coefficients.
    Jet bump_jet(double tau, std::size_t len) const;

    /// Value and time derivatives (index 0 = value) of the step over
    /// [t0, t1] at time t. Throws CapabilityError for n > max_order.
    std::vector<double> eval(double t, double t0, double t1, std::size_t n) const;

    /// Integral of the step from t0 to t.
    double integral(double t, double t0, double t1) const;

  private:
    double order_;
    double w_;
    double norm_;  // integral of the bump over [0,1]
    std::size_t max_order_;
};

}  // namespace vgf

#endif

#ifndef VGF_JET_HPP
#define VGF_JET_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vgf {

/// Truncated Taylor series of a scalar function at one point.
///
/// Coefficients are stored in normalized form c[k] = f^(k)/k!, which keeps
/// the recurrences well scaled even for high orders. All binary operations
/// truncate to the shorter operand.
class Jet {
  public:
    Jet() = default;
    explicit Jet(std::size_t len, double value = 0.0) : c_(len, 0.0) {
        if (len == 0) throw std::invalid_argument("Jet: empty");
        c_[0] = value;
    }
    static Jet constant(std::size_t len, double value) { return Jet(len, value); }
    /// The identity function t -> t0 + (t - t0).
    static Jet variable(std::size_t len, double t0) {
        Jet j(len, t0);
        if (len > 1) j.c_[1] = 1.0;
        return j;
    }
    static Jet from_coeffs(std::vector<double> coeffs) {
        Jet j;
        j.c_ = std::move(coeffs);
        if (j.c_.empty()) throw std::invalid_argument("Jet: empty");
        return j;
    }

    std::size_t size() const { return c_.size(); }
    double value() const { return c_[0]; }
    double coeff(std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
    /// k-th derivative value, c[k] * k!.
    double derivative(std::size_t k) const;
    const std::vector<double>& coeffs() const { return c_; }

    /// Series of the derivative function (one order shorter).
    Jet differentiate() const;

    Jet operator-() const;
    Jet operator+(const Jet& o) const;
    Jet operator-(const Jet& o) const;
    Jet operator*(const Jet& o) const;
    Jet operator*(double s) const;
    Jet operator+(double s) const;

    Jet reciprocal() const;
    Jet exp() const;
    /// Real power u^p; requires u(0) > 0.
    Jet pow(double p) const;

  private:
    std::vector<double> c_;
};

inline Jet operator*(double s, const Jet& j) { return j * s; }

}  // namespace vgf

#endif

#include "vgf/jet.hpp"

#include <algorithm>

namespace vgf {

double Jet::derivative(std::size_t k) const {
    if (k >= c_.size()) return 0.0;
    double fact = 1.0;
    for (std::size_t i = 2; i <= k; ++i) fact *= static_cast<double>(i);
    return c_[k] * fact;
}

Jet Jet::differentiate() const {
    if (c_.size() < 2) return Jet(1, 0.0);
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 0; k + 1 < c_.size(); ++k) {
        d[k] = c_[k + 1] * static_cast<double>(k + 1);
    }
    return from_coeffs(std::move(d));
}

Jet Jet::operator-() const {
    Jet out = *this;
    for (double& v : out.c_) v = -v;
    return out;
}

Jet Jet::operator+(const Jet& o) const {
    const std::size_t n = std::min(c_.size(), o.c_.size());
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = c_[k] + o.c_[k];
    return from_coeffs(std::move(r));
}

Jet Jet::operator-(const Jet& o) const {
    const std::size_t n = std::min(c_.size(), o.c_.size());
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = c_[k] - o.c_[k];
    return from_coeffs(std::move(r));
}

Jet Jet::operator*(const Jet& o) const {
    const std::size_t n = std::min(c_.size(), o.c_.size());
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; i + j < n; ++j) r[i + j] += c_[i] * o.c_[j];
    }
    return from_coeffs(std::move(r));
}

Jet Jet::operator*(double s) const {
    Jet out = *this;
    for (double& v : out.c_) v *= s;
    return out;
}

Jet Jet::operator+(double s) const {
    Jet out = *this;
    out.c_[0] += s;
    return out;
}

Jet Jet::reciprocal() const {
    if (c_[0] == 0.0) throw std::domain_error("Jet::reciprocal: zero leading coefficient");
    std::vector<double> r(c_.size(), 0.0);
    r[0] = 1.0 / c_[0];
    for (std::size_t k = 1; k < c_.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) acc += c_[j] * r[k - j];
        r[k] = -acc / c_[0];
    }
    return from_coeffs(std::move(r));
}

Jet Jet::exp() const {
    // e = exp(u): e' = u' e  =>  k e_k = sum_{j=1..k} j u_j e_{k-j}
    std::vector<double> e(c_.size(), 0.0);
    e[0] = std::exp(c_[0]);
    for (std::size_t k = 1; k < c_.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            acc += static_cast<double>(j) * c_[j] * e[k - j];
        }
        e[k] = acc / static_cast<double>(k);
    }
    return from_coeffs(std::move(e));
}

Jet Jet::pow(double p) const {
    // h = u^p: u h' = p u' h  =>  k u_0 h_k = sum_{j=1..k} (p j - (k - j)) u_j h_{k-j}
    if (c_[0] <= 0.0) throw std::domain_error("Jet::pow: need positive leading coefficient");
    std::vector<double> h(c_.size(), 0.0);
    h[0] = std::pow(c_[0], p);
    for (std::size_t k = 1; k < c_.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            acc += (p * static_cast<double>(j) - static_cast<double>(k - j)) * c_[j] * h[k - j];
        }
        h[k] = acc / (static_cast<double>(k) * c_[0]);
    }
    return from_coeffs(std::move(h));
}

}  // namespace vgf

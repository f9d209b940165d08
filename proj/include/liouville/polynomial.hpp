#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace liouville {

// Dense polynomial, coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : c_(std::move(c)) {}

  static Polynomial constant(double v) { return Polynomial({v}); }

  // prod (lambda - r) over the given roots.
  template <class Range>
  static Polynomial from_roots(const Range& roots) {
    Polynomial p({1.0});
    for (double r : roots) p = p * Polynomial({-r, 1.0});
    return p;
  }

  int degree() const {
    for (int k = int(c_.size()) - 1; k >= 0; --k)
      if (c_[k] != 0.0) return k;
    return -1;
  }

  double coeff(int k) const {
    return k >= 0 && k < int(c_.size()) ? c_[k] : 0.0;
  }
  const std::vector<double>& coeffs() const { return c_; }

  double operator()(double x) const {
    double s = 0;
    for (std::size_t k = c_.size(); k-- > 0;) s = s * x + c_[k];
    return s;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = double(k) * c_[k];
    return Polynomial(d);
  }

  // Synthetic division by (x - r); the remainder is dropped.
  Polynomial deflate(double r) const {
    if (c_.size() <= 1) return Polynomial({0.0});
    std::vector<double> q(c_.size() - 1);
    double carry = 0;
    for (std::size_t k = c_.size(); k-- > 1;) {
      carry = c_[k] + carry * r;
      q[k - 1] = carry;
    }
    return Polynomial(q);
  }

  double max_abs_coeff() const {
    double m = 0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.c_.empty() || q.c_.empty()) return Polynomial();
    std::vector<double> r(p.c_.size() + q.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.c_.size(); ++i)
      for (std::size_t j = 0; j < q.c_.size(); ++j) r[i + j] += p.c_[i] * q.c_[j];
    return Polynomial(r);
  }
  friend Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    std::vector<double> r(std::max(p.c_.size(), q.c_.size()), 0.0);
    for (std::size_t i = 0; i < p.c_.size(); ++i) r[i] += p.c_[i];
    for (std::size_t i = 0; i < q.c_.size(); ++i) r[i] += q.c_[i];
    return Polynomial(r);
  }
  friend Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> r = p.c_;
    for (double& v : r) v *= s;
    return Polynomial(r);
  }
  friend Polynomial operator-(const Polynomial& p, const Polynomial& q) {
    return p + (-1.0) * q;
  }

 private:
  std::vector<double> c_;
};

}  // namespace liouville

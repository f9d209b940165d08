#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"

namespace liouville {

// The function A(lambda) on [a_n, a_0] that fixes the metric family.
//
//   Sqrt       A = sqrt(lambda) + p(lambda)   (p empty gives the ellipsoid)
//   Constant   A = c
//   Polynomial A = p(lambda)
//   Table      Chebyshev interpolant of samples at the extreme points of [lo, hi]
class GeneratorFunction {
 public:
  enum class Kind { Sqrt, Constant, Polynomial, Table };

  static GeneratorFunction sqrt(std::vector<double> perturbation = {}) {
    GeneratorFunction g;
    g.kind_ = Kind::Sqrt;
    g.poly_ = Polynomial(std::move(perturbation));
    return g;
  }
  static GeneratorFunction constant(double c = 1.0) {
    GeneratorFunction g;
    g.kind_ = Kind::Constant;
    g.poly_ = Polynomial({c});
    return g;
  }
  static GeneratorFunction polynomial(std::vector<double> coeffs) {
    GeneratorFunction g;
    g.kind_ = Kind::Polynomial;
    g.poly_ = Polynomial(std::move(coeffs));
    return g;
  }
  // values[j] = A(x_j), x_j = mid + half*cos(pi*j/N), j = 0..N.
  static GeneratorFunction table(double lo, double hi, std::vector<double> values) {
    if (values.size() < 2 || !(hi > lo))
      throw InputError("table generator needs >= 2 samples on a nonempty interval");
    GeneratorFunction g;
    g.kind_ = Kind::Table;
    g.lo_ = lo;
    g.hi_ = hi;
    g.samples_ = values;
    const int N = int(values.size()) - 1;
    g.cheb_.assign(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) {
      double s = 0;
      for (int j = 0; j <= N; ++j) {
        double w = (j == 0 || j == N) ? 0.5 : 1.0;
        s += w * values[j] * std::cos(std::numbers::pi * k * j / N);
      }
      s *= 2.0 / N;
      if (k == 0 || k == N) s *= 0.5;
      g.cheb_[k] = s;
    }
    return g;
  }

  Kind kind() const { return kind_; }
  bool is_pure_sqrt() const { return kind_ == Kind::Sqrt && poly_.degree() < 0; }
  const Polynomial& poly() const { return poly_; }
  const std::vector<double>& samples() const { return samples_; }
  double table_lo() const { return lo_; }
  double table_hi() const { return hi_; }

  std::string kind_name() const {
    switch (kind_) {
      case Kind::Sqrt: return "sqrt";
      case Kind::Constant: return "const";
      case Kind::Polynomial: return "poly";
      case Kind::Table: return "table";
    }
    return "?";
  }

  double operator()(double lam) const { return derivative(0, lam); }

  // k-th derivative at lambda.
  double derivative(int k, double lam) const {
    switch (kind_) {
      case Kind::Sqrt: {
        double c = 1.0;
        for (int j = 0; j < k; ++j) c *= 0.5 - j;
        return c * std::pow(lam, 0.5 - k) + poly_derivative(k, lam);
      }
      case Kind::Constant:
        return k == 0 ? poly_.coeff(0) : 0.0;
      case Kind::Polynomial:
        return poly_derivative(k, lam);
      case Kind::Table:
        return cheb_derivative(k, lam);
    }
    return 0.0;
  }

  // Throws InputError if a sample on [lo, hi] is not strictly positive.
  void check_positive(double lo, double hi, int samples = 1000) const {
    for (int j = 0; j <= samples; ++j) {
      double lam = lo + (hi - lo) * j / samples;
      double v = (*this)(lam);
      if (!(v > 0.0)) {
        std::ostringstream os;
        os << "generator A is not positive: A(" << lam << ") = " << v;
        throw InputError(os.str());
      }
    }
  }

 private:
  double poly_derivative(int k, double lam) const {
    Polynomial p = poly_;
    for (int j = 0; j < k; ++j) p = p.derivative();
    return p.coeffs().empty() ? 0.0 : p(lam);
  }

  double cheb_derivative(int k, double lam) const {
    std::vector<double> c = cheb_;
    for (int d = 0; d < k; ++d) {
      const int N = int(c.size()) - 1;
      if (N <= 0) return 0.0;
      std::vector<double> dc(N, 0.0);
      for (int j = N - 1; j >= 0; --j)
        dc[j] = (j + 2 <= N - 1 ? dc[j + 2] : 0.0) + 2.0 * (j + 1) * c[j + 1];
      dc[0] *= 0.5;
      c = dc;
    }
    double t = (2.0 * lam - lo_ - hi_) / (hi_ - lo_);
    double b1 = 0, b2 = 0;
    for (int j = int(c.size()) - 1; j >= 1; --j) {
      double b0 = c[j] + 2.0 * t * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    double v = (c.empty() ? 0.0 : c[0]) + t * b1 - b2;
    return v * std::pow(2.0 / (hi_ - lo_), k);
  }

  Kind kind_ = Kind::Constant;
  Polynomial poly_{{1.0}};
  double lo_ = 0, hi_ = 1;
  std::vector<double> samples_, cheb_;
};

}  // namespace liouville

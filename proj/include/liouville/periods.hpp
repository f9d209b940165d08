#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "generator.hpp"
#include "spectrum.hpp"

namespace liouville {

namespace detail {

// sum_{k=1}^{K} c[k-1] * sin(k v), Clenshaw.
inline double sine_series(const std::vector<double>& c, double v) {
  const double two_cos = 2.0 * std::cos(v);
  double b1 = 0, b2 = 0;
  for (std::size_t k = c.size(); k-- > 0;) {
    double b0 = c[k] + two_cos * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return b1 * std::sin(v);
}

// Index of the last coefficient above the noise floor, plus one.
inline std::size_t significant_length(const std::vector<double>& c, double floor) {
  std::size_t K = c.size();
  while (K > 0 && std::abs(c[K - 1]) <= floor) --K;
  return K;
}

}  // namespace detail

// The coordinate function f_i on R / alpha_i Z.
//
// With lambda = a_i + d sin^2(phi), d = a_{i-1} - a_i, the quarter-period map
// becomes x(phi) = int_0^phi h(psi) dpsi with h = A / sqrt(R_i) smooth, even
// and pi-periodic (R_i is the product of |lambda - a_j| over j != i, i-1).
// Both x(phi) and its inverse phi(x) are stored as truncated Fourier series,
// so f_i(x) = a_i + d sin^2(phi(x)) is analytic and periodic by construction.
class CoordinateFunction {
 public:
  struct Jet {
    double f, df, d2f;
  };

  CoordinateFunction() = default;

  CoordinateFunction(int i, const AxisSpectrum& a, const GeneratorFunction& A)
      : i_(i), lo_(a[i]), hi_(a[i - 1]), d_(a[i - 1] - a[i]), a_(a.values()), A_(A) {
    build_forward();
    build_inverse();
  }

  // Restore from stored series (period table sidecar).
  CoordinateFunction(int i, const AxisSpectrum& a, const GeneratorFunction& A, double h0,
                     std::vector<double> fwd, std::vector<double> inv)
      : i_(i), lo_(a[i]), hi_(a[i - 1]), d_(a[i - 1] - a[i]), a_(a.values()), A_(A),
        h0_(h0), fwd_(std::move(fwd)), inv_(std::move(inv)) {
    period_ = 2.0 * std::numbers::pi * h0_;
    omega_ = 1.0 / h0_;
  }

  int index() const { return i_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double period() const { return period_; }
  double h0() const { return h0_; }
  const std::vector<double>& forward_series() const { return fwd_; }
  const std::vector<double>& inverse_series() const { return inv_; }

  // h(lambda) = A(lambda) / sqrt(R_i(lambda)) = d phi / d x.
  double h_of_lambda(double lam) const {
    double R = 1.0;
    for (int j = 0; j < int(a_.size()); ++j)
      if (j != i_ && j != i_ - 1) R *= std::abs(lam - a_[j]);
    return A_(lam) / std::sqrt(R);
  }

  double x_of_phi(double phi) const {
    return h0_ * phi + detail::sine_series(fwd_, 2.0 * phi);
  }

  double phi(double x) const {
    double u = omega_ * x;
    return u + detail::sine_series(inv_, 2.0 * u);
  }

  double operator()(double x) const {
    double s = std::sin(phi(x));
    return lo_ + d_ * s * s;
  }

  Jet jet(double x) const {
    double ph = phi(x);
    double s = std::sin(ph), c = std::cos(ph);
    double lam = lo_ + d_ * s * s;
    Jet j;
    j.f = lam;
    j.df = d_ * 2.0 * s * c / h_of_lambda(lam);
    j.d2f = second_derivative(lam);
    return j;
  }

  // f'' as a function of f: one half of d/df of (f')^2.
  double second_derivative(double lam) const {
    const int n = int(a_.size()) - 1;
    double P = 1.0, dP = 0.0;
    for (int j = 0; j <= n; ++j) {
      dP = dP * (lam - a_[j]) + P;
      P *= lam - a_[j];
    }
    double A = A_(lam), dA = A_.derivative(1, lam);
    double sgn = (i_ % 2 == 0) ? 1.0 : -1.0;
    return 2.0 * sgn * (dP * A - 2.0 * P * dA) / (A * A * A);
  }

  // sin(phi(x)), cos(phi(x)) and their x-derivatives; used by the ellipsoid
  // embedding where sqrt(f - a_i) and sqrt(a_{i-1} - f) need signs.
  void sin_cos(double x, double& s, double& c, double& ds, double& dc) const {
    double ph = phi(x);
    s = std::sin(ph);
    c = std::cos(ph);
    double lam = lo_ + d_ * s * s;
    double dph = 1.0 / h_of_lambda(lam);
    ds = c * dph;
    dc = -s * dph;
  }

  // x in the given quarter q (phi in [q pi/2, (q+1) pi/2]) with f(x) = lam.
  double inverse(double lam, int q = 0) const {
    double p = std::max(0.0, lam - lo_), r = std::max(0.0, hi_ - lam);
    double ph0 = std::atan2(std::sqrt(p), std::sqrt(r));
    const double pi = std::numbers::pi;
    double ph;
    switch (((q % 4) + 4) % 4) {
      case 0: ph = ph0; break;
      case 1: ph = pi - ph0; break;
      case 2: ph = pi + ph0; break;
      default: ph = 2 * pi - ph0; break;
    }
    return x_of_phi(ph);
  }

  // x with the prescribed signs of sin(phi) and cos(phi).
  double inverse_signed(double lam, int sin_sign, int cos_sign) const {
    int q;
    if (sin_sign >= 0)
      q = cos_sign >= 0 ? 0 : 1;
    else
      q = cos_sign >= 0 ? 3 : 2;
    return inverse(lam, q);
  }

 private:
  void build_forward() {
    const double pi = std::numbers::pi;
    for (int M = 32; M <= (1 << 16); M *= 2) {
      std::vector<double> h(M);
      for (int m = 0; m < M; ++m) {
        double s = std::sin(pi * m / M);
        h[m] = h_of_lambda(lo_ + d_ * s * s);
      }
      double H0 = 0;
      for (double v : h) H0 += v;
      H0 /= M;
      const int Kmax = M / 2 - 1;
      std::vector<double> H(Kmax, 0.0);
      for (int k = 1; k <= Kmax; ++k) {
        double s = 0;
        for (int m = 0; m < M; ++m) s += h[m] * std::cos(2.0 * pi * k * m / M);
        H[k - 1] = 2.0 * s / M;
      }
      double floor = 5e-15 * std::abs(H0);
      bool resolved = true;
      for (int k = Kmax / 2; k < Kmax; ++k)
        if (std::abs(H[k]) > 10 * floor) resolved = false;
      if (resolved || M == (1 << 16)) {
        if (!resolved) throw NumericalError("period series for f_i did not converge");
        h0_ = H0;
        H.resize(detail::significant_length(H, floor));
        fwd_.resize(H.size());
        for (std::size_t k = 0; k < H.size(); ++k) fwd_[k] = H[k] / (2.0 * double(k + 1));
        period_ = 2.0 * pi * h0_;
        omega_ = 1.0 / h0_;
        return;
      }
    }
  }

  void build_inverse() {
    const double pi = std::numbers::pi;
    for (int M = 32; M <= (1 << 16); M *= 2) {
      std::vector<double> rho(M);
      for (int m = 0; m < M; ++m) {
        double u = pi * m / M;
        double x = h0_ * u;
        double ph = u;
        for (int it = 0; it < 60; ++it) {
          double s = std::sin(ph);
          double step = (x_of_phi(ph) - x) / h_of_lambda(lo_ + d_ * s * s);
          ph -= step;
          if (std::abs(step) < 1e-16) break;
        }
        rho[m] = ph - u;
      }
      const int Kmax = M / 2 - 1;
      std::vector<double> r(Kmax, 0.0);
      for (int k = 1; k <= Kmax; ++k) {
        double s = 0;
        for (int m = 0; m < M; ++m) s += rho[m] * std::sin(2.0 * pi * k * m / M);
        r[k - 1] = 2.0 * s / M;
      }
      double floor = 5e-15;
      bool resolved = true;
      for (int k = Kmax / 2; k < Kmax; ++k)
        if (std::abs(r[k]) > 10 * floor) resolved = false;
      if (resolved || M == (1 << 16)) {
        if (!resolved) throw NumericalError("inverse series for f_i did not converge");
        r.resize(detail::significant_length(r, floor));
        inv_ = r;
        return;
      }
    }
  }

  int i_ = 1;
  double lo_ = 0, hi_ = 1, d_ = 1;
  std::vector<double> a_;
  GeneratorFunction A_;
  double h0_ = 1, period_ = 2 * std::numbers::pi, omega_ = 1;
  std::vector<double> fwd_, inv_;
};

// Periods alpha_i and the coordinate functions f_i, i = 1..n (stored 0-based).
struct PeriodTable {
  std::vector<CoordinateFunction> f;

  double alpha(int i) const { return f[i - 1].period(); }
  const CoordinateFunction& operator[](int i) const { return f[i - 1]; }
};

inline PeriodTable compute_periods(const AxisSpectrum& a, const GeneratorFunction& A) {
  A.check_positive(a[a.n()], a[0]);
  PeriodTable t;
  for (int i = 1; i <= a.n(); ++i) t.f.emplace_back(i, a, A);
  return t;
}

}  // namespace liouville

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "generator.hpp"
#include "periods.hpp"
#include "spectrum.hpp"

namespace liouville {

struct Tolerances {
  double rtol = 1e-10;             // integrator relative tolerance
  double atol = 1e-12;             // integrator absolute tolerance
  double degeneracy = 1e-9;        // "equals a_k / equals b_l" band, times (a_0 - a_n)
  double energy_step = 1e-11;      // per-step energy drift allowed before rejection
  double b_drift_abort = 1e-6;     // abort integration beyond this drift of b
  double time = 1e-9;              // event time tolerance
  double multiplicity = 1e-7;      // singular value threshold relative to ||P||
  double branch_guard = 1e-12;     // metric coefficients below this are "on the branch set"
};

// The manifold built from (a, A): spectrum, generator and coordinate tables.
class LiouvilleManifold {
 public:
  LiouvilleManifold(AxisSpectrum a, GeneratorFunction A, Tolerances tol = {})
      : a_(std::move(a)), A_(std::move(A)), tol_(tol), table_(compute_periods(a_, A_)) {}

  LiouvilleManifold(AxisSpectrum a, GeneratorFunction A, Tolerances tol, PeriodTable table)
      : a_(std::move(a)), A_(std::move(A)), tol_(tol), table_(std::move(table)) {}

  int n() const { return a_.n(); }
  double a(int k) const { return a_[k]; }
  const AxisSpectrum& spectrum() const { return a_; }
  const GeneratorFunction& A() const { return A_; }
  const Tolerances& tol() const { return tol_; }
  void set_tolerances(const Tolerances& t) { tol_ = t; }
  const PeriodTable& table() const { return table_; }
  const CoordinateFunction& f(int i) const { return table_[i]; }
  double alpha(int i) const { return table_.alpha(i); }
  double deg_tol() const { return tol_.degeneracy * a_.width(); }
  bool is_ellipsoid() const { return A_.is_pure_sqrt(); }

 private:
  AxisSpectrum a_;
  GeneratorFunction A_;
  Tolerances tol_;
  PeriodTable table_;
};

// A point of the torus cover: x_i in R / alpha_i Z, with lambda_i = f_i(x_i) cached.
struct BandPoint {
  std::vector<double> x;
  std::vector<double> lambda;

  int n() const { return int(x.size()); }
};

inline BandPoint make_point(const LiouvilleManifold& M, std::vector<double> x) {
  if (int(x.size()) != M.n()) throw InputError("point has wrong number of coordinates");
  BandPoint p;
  p.lambda.resize(x.size());
  for (int i = 1; i <= M.n(); ++i) p.lambda[i - 1] = M.f(i)(x[i - 1]);
  p.x = std::move(x);
  return p;
}

// Reduce x_i to [0, alpha_i).
inline double wrap_period(double x, double alpha) {
  double r = std::fmod(x, alpha);
  if (r < 0) r += alpha;
  return r;
}

// Fundamental domain 0 <= x_i <= alpha_i / 4 using the symmetries of f_i
// (f_i even, f_i(alpha_i/2 - x) = f_i(x)); lambda is unchanged.
inline BandPoint normalize_fundamental(const LiouvilleManifold& M, const BandPoint& p) {
  std::vector<double> x(p.x.size());
  for (int i = 1; i <= M.n(); ++i) {
    double al = M.alpha(i);
    double r = wrap_period(p.x[i - 1], al / 2.0);
    if (r > al / 4.0) r = al / 2.0 - r;
    x[i - 1] = r;
  }
  return make_point(M, x);
}

// g_i = (-1)^{n-i} prod_{l != i} (lambda_l - lambda_i), i = 1..n (0-based output).
inline std::vector<double> metric_coefficients(const std::vector<double>& lam) {
  const int n = int(lam.size());
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    double p = ((n - 1 - i) % 2 == 0) ? 1.0 : -1.0;
    for (int l = 0; l < n; ++l)
      if (l != i) p *= lam[l] - lam[i];
    g[i] = p;
  }
  return g;
}

inline std::vector<double> metric_at(const LiouvilleManifold& M, const BandPoint& p) {
  std::vector<double> g = metric_coefficients(p.lambda);
  double scale = std::pow(M.spectrum().width(), M.n() - 1);
  for (int i = 0; i < M.n(); ++i) {
    if (!(g[i] > M.tol().branch_guard * scale)) {
      std::ostringstream os;
      os << "metric degenerate at point (branch set): g" << i + 1 << " = " << g[i];
      throw NumericalError(os.str());
    }
  }
  return g;
}

// 2E = sum xi_i^2 / g_i.
inline double twice_energy(const std::vector<double>& lam, const std::vector<double>& xi) {
  std::vector<double> g = metric_coefficients(lam);
  double s = 0;
  for (std::size_t i = 0; i < lam.size(); ++i) s += xi[i] * xi[i] / g[i];
  return s;
}

// F_1..F_{n-1} followed by F_n = 2E.
inline std::vector<double> first_integrals(const LiouvilleManifold& M, const BandPoint& p,
                                           const std::vector<double>& xi) {
  const int n = M.n();
  std::vector<double> g = metric_at(M, p);
  std::vector<double> F(n, 0.0);
  for (int j = 1; j <= n - 1; ++j) {
    double denom = 1.0;
    for (int k = 1; k <= n - 1; ++k)
      if (k != j) denom *= M.a(k) - M.a(j);
    double s = 0;
    for (int i = 0; i < n; ++i) {
      double num = 1.0;
      for (int l = 0; l < n; ++l)
        if (l != i) num *= p.lambda[l] - M.a(j);
      // (-1)^{n-i} / prod (f_l - f_i) is 1 / g_i
      s += num / g[i] * xi[i] * xi[i];
    }
    F[j - 1] = s / denom;
  }
  double e2 = 0;
  for (int i = 0; i < n; ++i) e2 += xi[i] * xi[i] / g[i];
  F[n - 1] = e2;
  return F;
}

// b_{ij}(x_i) of the defining linear system sum_j b_ij F_j = xi_i^2 (1-based indices).
inline double b_matrix_entry(const LiouvilleManifold& M, double lam_i, int i, int j) {
  const int n = M.n();
  double p = 1.0;
  if (j <= n - 1) {
    for (int k = 1; k <= n - 1; ++k)
      if (k != j) p *= lam_i - M.a(k);
    return (i % 2 == 0 ? 1.0 : -1.0) * p;
  }
  for (int k = 1; k <= n - 1; ++k) p *= lam_i - M.a(k);
  return (i % 2 == 0 ? -1.0 : 1.0) * p;
}

struct SubmanifoldTag {
  std::vector<bool> in_N;  // k = 0..n
  std::vector<bool> in_J;  // k = 0..n, only 1..n-1 meaningful

  bool N(int k) const { return in_N[k]; }
  bool J(int k) const { return in_J[k]; }
  bool any() const {
    for (bool b : in_N)
      if (b) return true;
    return false;
  }
};

// N_k = {lambda_k = a_k or lambda_{k+1} = a_k}, J_k = {lambda_k = lambda_{k+1} = a_k}.
inline SubmanifoldTag classify_point(const LiouvilleManifold& M, const BandPoint& p,
                                     double tol = -1) {
  if (tol < 0) tol = M.deg_tol();
  const int n = M.n();
  SubmanifoldTag t;
  t.in_N.assign(n + 1, false);
  t.in_J.assign(n + 1, false);
  for (int k = 0; k <= n; ++k) {
    bool lower = k >= 1 && std::abs(p.lambda[k - 1] - M.a(k)) <= tol;
    bool upper = k + 1 <= n && std::abs(p.lambda[k] - M.a(k)) <= tol;
    t.in_N[k] = lower || upper;
    t.in_J[k] = lower && upper;
  }
  return t;
}

}  // namespace liouville

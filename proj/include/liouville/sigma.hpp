#pragma once

#include <cmath>
#include <vector>

#include "geodesic.hpp"
#include "quadrature.hpp"

namespace liouville {

// prod_{k=1..n-1, k != l} (lambda - a_k).
inline Polynomial abel_polynomial(const AxisSpectrum& a, int l) {
  std::vector<double> r;
  for (int k = 1; k <= a.n() - 1; ++k)
    if (k != l) r.push_back(a[k]);
  return Polynomial::from_roots(r);
}

// Values of f_i at s, at the turning points in (s, t), and at t.
inline std::vector<double> leg_values(const GeodesicTrace& tr, int i, double s, double t) {
  std::vector<double> v{tr.f(i, s)};
  for (const auto& p : tr.turns[i - 1])
    if (p.t > s && p.t < t) v.push_back(p.f);
  v.push_back(tr.f(i, t));
  return v;
}

struct SigmaIntegral {
  double value = 0;
  double scale = 0;  // largest single-band period magnitude
  bool converged = true;
};

// int_{sigma_i(s)}^{sigma_i(t)} of the band-i integrand of pi (pi.i = i), leg by leg.
inline SigmaIntegral sigma_leg_sum(const GeodesicTrace& tr, const PeriodIntegrand& pi, double s,
                                   double t, const QuadOptions& opt = {}) {
  if (s > t) {
    SigmaIntegral r = sigma_leg_sum(tr, pi, t, s, opt);
    r.value = -r.value;
    return r;
  }
  SigmaIntegral r;
  const int i = pi.i;
  QuadResult full = period_integral(pi, opt);
  r.scale = full.magnitude;
  r.converged = full.converged;
  if (s == t) return r;
  const double lo = pi.cfg.lo(i), hi = pi.cfg.hi(i), tol = 1e-12 * pi.cfg.width();
  auto P = [&](double lam) {
    if (lam <= lo + tol) return 0.0;
    if (lam >= hi - tol) return full.value;
    QuadResult q = band_partial_integral(pi, lam, opt);
    r.converged = r.converged && q.converged;
    return q.value;
  };
  std::vector<double> v = leg_values(tr, i, s, t);
  // interior entries are turns and sit on a band edge; the traced value carries the
  // integration error, which the square-root endpoint behavior would amplify
  for (std::size_t k = 1; k + 1 < v.size(); ++k) v[k] = (v[k] - lo < hi - v[k]) ? lo : hi;
  std::vector<double> Pv(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) Pv[k] = P(v[k]);
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    r.value += (v[k + 1] >= v[k] ? 1.0 : -1.0) * (Pv[k + 1] - Pv[k]);
  return r;
}

// sum_i (-1)^i int_{sigma_i(s)}^{sigma_i(t)} G(f_i) A(f_i) / sqrt(|radicand|) dsigma_i.
inline SigmaIntegral sigma_integral(const GeodesicTrace& tr, const Polynomial& G, double s,
                                    double t, const QuadOptions& opt = {}) {
  const LiouvilleManifold& M = *tr.M;
  const int n = M.n();
  const FirstIntegralVector& b = tr.b0;
  for (int l = 1; l <= n - 1; ++l)
    if (b.flags[l - 1] & (kAtA | kCoincident))
      throw InputError("sigma integrals need generic first integrals (b at a degeneracy)");
  SigmaIntegral r;
  BandConfig cfg = b.config(M.spectrum());
  std::function<double(double)> W = [&M](double lam) { return M.A()(lam); };
  for (int i = 1; i <= n; ++i) {
    SigmaIntegral q = sigma_leg_sum(tr, PeriodIntegrand{G, W, cfg, i}, s, t, opt);
    r.value += alt_sign(i) * q.value;
    r.scale = std::max(r.scale, q.scale);
    r.converged = r.converged && q.converged;
  }
  if (s == t) r.value = 0;
  return r;
}

struct AbelReport {
  double residual = 0;  // scaled by one period magnitude
  double raw = 0;
  double scale = 0;
};

inline AbelReport abel_residual(const GeodesicTrace& tr, double s, double t, int l,
                                const QuadOptions& opt = {}) {
  const int n = tr.n;
  if (l < 1 || l > n - 1) throw InputError("abel_residual: index l out of range");
  SigmaIntegral q = sigma_integral(tr, abel_polynomial(tr.M->spectrum(), l), s, t, opt);
  AbelReport r;
  r.raw = q.value;
  r.scale = q.scale;
  r.residual = q.scale > 0 ? q.value / q.scale : q.value;
  return r;
}

// Elapsed length from the sigma clocks with a monic numerator of degree n - 1.
inline double length_from_sigma(const GeodesicTrace& tr, const Polynomial& monic, double s,
                                double t, const QuadOptions& opt = {}) {
  const int n = tr.n;
  if (monic.degree() != n - 1 || std::abs(monic.coeff(n - 1) - 1.0) > 1e-15)
    throw InputError("length identity needs a monic numerator of degree n - 1");
  return -0.5 * sigma_integral(tr, monic, s, t, opt).value;
}

}  // namespace liouville

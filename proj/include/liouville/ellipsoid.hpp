#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace liouville {

// Ambient coordinates for A = sqrt(lambda): sum u_i^2 / a_i = 1.
//
// u_i = C_i * prod_k s_ik(x_k) where s_ik = sqrt(d_i) sin(phi_i) for k = i,
// sqrt(d_{i+1}) cos(phi_{i+1}) for k = i + 1, and sqrt|lambda_k - a_i| otherwise.
// The signs come from the torus coordinates, so the map is smooth on the
// cover and invariant under the involutions tau_i.
struct EllipsoidEmbedding {
  std::vector<double> u;                  // n + 1 values
  std::vector<std::vector<double>> du;    // du[i][k] = d u_i / d x_k
};

inline EllipsoidEmbedding ellipsoid_embed_with_jacobian(const LiouvilleManifold& M,
                                                        const BandPoint& p) {
  const int n = M.n();
  EllipsoidEmbedding e;
  e.u.assign(n + 1, 0.0);
  e.du.assign(n + 1, std::vector<double>(n, 0.0));
  std::vector<double> s(n + 1), c(n + 1), ds(n + 1), dc(n + 1), dlam(n + 1);
  for (int k = 1; k <= n; ++k) {
    M.f(k).sin_cos(p.x[k - 1], s[k], c[k], ds[k], dc[k]);
    dlam[k] = M.f(k).jet(p.x[k - 1]).df;
  }
  for (int i = 0; i <= n; ++i) {
    double denom = 1.0;
    for (int j = 0; j <= n; ++j)
      if (j != i) denom *= M.a(j) - M.a(i);
    const double C = std::sqrt(M.a(i) / std::abs(denom));
    std::vector<double> fac(n + 1), dfac(n + 1);
    for (int k = 1; k <= n; ++k) {
      if (k == i) {
        double sd = std::sqrt(M.a(k - 1) - M.a(k));
        fac[k] = sd * s[k];
        dfac[k] = sd * ds[k];
      } else if (k == i + 1) {
        double sd = std::sqrt(M.a(k - 1) - M.a(k));
        fac[k] = sd * c[k];
        dfac[k] = sd * dc[k];
      } else {
        double diff = p.lambda[k - 1] - M.a(i);
        double r = std::sqrt(std::abs(diff));
        fac[k] = r;
        dfac[k] = (diff >= 0 ? 1.0 : -1.0) * dlam[k] / (2.0 * r);
      }
    }
    double prod = C;
    for (int k = 1; k <= n; ++k) prod *= fac[k];
    e.u[i] = prod;
    for (int k = 1; k <= n; ++k) {
      double q = C * dfac[k];
      for (int m = 1; m <= n; ++m)
        if (m != k) q *= fac[m];
      e.du[i][k - 1] = q;
    }
  }
  return e;
}

inline std::vector<double> ellipsoid_embed(const LiouvilleManifold& M, const BandPoint& p) {
  if (!M.is_ellipsoid()) throw InputError("ellipsoid embedding needs A = sqrt(lambda)");
  return ellipsoid_embed_with_jacobian(M, p).u;
}

inline double ellipsoid_constraint(const AxisSpectrum& a, const std::vector<double>& u) {
  double s = 0;
  for (int i = 0; i <= a.n(); ++i) s += u[i] * u[i] / a[i];
  return s;
}

// Roots lambda_1 >= ... >= lambda_n of sum u_i^2/(a_i - lambda) - 1 = 0 (other than 0).
inline std::vector<double> elliptic_coords(const AxisSpectrum& a, const std::vector<double>& u,
                                           double on_surface_tol = 1e-10) {
  const int n = a.n();
  if (int(u.size()) != n + 1) throw InputError("ambient point has wrong dimension");
  if (std::abs(ellipsoid_constraint(a, u) - 1.0) > on_surface_tol)
    throw InputError("point is off the ellipsoid");
  double umax = 0;
  for (double v : u) umax = std::max(umax, std::abs(v));
  const double zero = 1e-300;
  std::vector<int> poles;
  std::vector<double> roots;
  for (int i = 0; i <= n; ++i) {
    if (std::abs(u[i]) > zero)
      poles.push_back(i);
    else
      roots.push_back(a[i]);
  }
  auto F = [&](double lam) {
    double s = -1.0;
    for (int i : poles) s += u[i] * u[i] / (a[i] - lam);
    return s;
  };
  // poles are in decreasing order of a; one root between consecutive poles
  for (std::size_t q = 0; q + 1 < poles.size(); ++q) {
    double lo = a[poles[q + 1]], hi = a[poles[q]];
    double L = lo, H = hi;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (L + H);
      if (mid <= L || mid >= H) break;
      if (F(mid) < 0)
        L = mid;
      else
        H = mid;
    }
    roots.push_back(0.5 * (L + H));
  }
  std::sort(roots.begin(), roots.end(), std::greater<double>());
  roots.resize(n);
  for (int k = 1; k <= n; ++k) roots[k - 1] = std::clamp(roots[k - 1], a[k], a[k - 1]);
  return roots;
}

// Torus coordinates of an ambient point (representative with sin(phi_i) >= 0, i < n).
inline BandPoint torus_from_ambient(const LiouvilleManifold& M, const std::vector<double>& u) {
  const int n = M.n();
  std::vector<double> lam = elliptic_coords(M.spectrum(), u);
  auto sgn = [](double v) { return v < 0 ? -1 : 1; };
  std::vector<double> x(n);
  for (int k = 1; k <= n; ++k) {
    int ss = (k == n) ? sgn(u[n]) : 1;
    int cs = sgn(u[k - 1]);
    x[k - 1] = M.f(k).inverse_signed(lam[k - 1], ss, cs);
  }
  return make_point(M, x);
}

}  // namespace liouville

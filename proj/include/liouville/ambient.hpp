#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dop853.hpp"
#include "ellipsoid.hpp"
#include "geodesic.hpp"
#include "roots.hpp"

namespace liouville {

// Geodesics of the ellipsoid sum u_i^2 / a_i = 1 in R^{n+1}:
//   u'' = -mu u / a,   mu = (sum v_i^2 / a_i) / (sum u_i^2 / a_i^2),
// optionally with linearized columns (du, dv) and normal Jacobi scalars.
struct AmbientTrace {
  std::vector<double> a;
  int m = 0;         // n + 1
  int columns = 0;   // linearized columns of length 2m
  int scalars = 0;   // (y, y') pairs for normal Jacobi fields
  std::vector<int> scalar_axis;
  std::vector<double> z0;
  std::vector<DenseStep> steps;
  double t_end = 0;

  std::vector<double> state(double t) const {
    if (steps.empty() || t <= steps.front().t0) return z0;
    auto it = std::lower_bound(steps.begin(), steps.end(), t,
                               [](const DenseStep& s, double v) { return s.t1() < v; });
    if (it == steps.end()) --it;
    return it->eval(std::min(t, it->t1()));
  }
  double coord(double t, int k) const {
    if (steps.empty() || t <= steps.front().t0) return z0[k];
    auto it = std::lower_bound(steps.begin(), steps.end(), t,
                               [](const DenseStep& s, double v) { return s.t1() < v; });
    if (it == steps.end()) --it;
    return it->eval(std::min(t, it->t1()), k);
  }
  std::vector<double> u(double t) const {
    std::vector<double> z = state(t);
    return {z.begin(), z.begin() + m};
  }
};

struct AmbientOptions {
  double rtol = 1e-12, atol = 1e-14;
  double hmax = 0.25;
};

namespace detail {

inline void ambient_rhs(const std::vector<double>& a, int m, int cols, const std::vector<int>& axis,
                        const double* z, double* dz) {
  const double *u = z, *v = z + m;
  double P = 0, Q = 0;
  for (int i = 0; i < m; ++i) {
    P += v[i] * v[i] / a[i];
    Q += u[i] * u[i] / (a[i] * a[i]);
  }
  double mu = P / Q;
  for (int i = 0; i < m; ++i) {
    dz[i] = v[i];
    dz[m + i] = -mu * u[i] / a[i];
  }
  int off = 2 * m;
  for (int c = 0; c < cols; ++c, off += 2 * m) {
    const double *du = z + off, *dv = z + off + m;
    double dP = 0, dQ = 0;
    for (int i = 0; i < m; ++i) {
      dP += 2 * v[i] * dv[i] / a[i];
      dQ += 2 * u[i] * du[i] / (a[i] * a[i]);
    }
    double dmu = (dP * Q - P * dQ) / (Q * Q);
    for (int i = 0; i < m; ++i) {
      dz[off + i] = dv[i];
      dz[off + m + i] = -dmu * u[i] / a[i] - mu * du[i] / a[i];
    }
  }
  for (std::size_t s = 0; s < axis.size(); ++s, off += 2) {
    dz[off] = z[off + 1];
    dz[off + 1] = -mu * z[off] / a[axis[s]];
  }
}

}  // namespace detail

inline AmbientTrace integrate_ambient(const AxisSpectrum& spec, const std::vector<double>& u0,
                                      const std::vector<double>& v0, double T,
                                      const AmbientOptions& opt = {},
                                      const std::function<bool(const AmbientTrace&)>& stop = {},
                                      const std::vector<std::vector<double>>& columns = {},
                                      const std::vector<int>& normal_axes = {}) {
  AmbientTrace tr;
  tr.a = spec.values();
  tr.m = spec.n() + 1;
  tr.columns = int(columns.size());
  tr.scalars = int(normal_axes.size());
  tr.scalar_axis = normal_axes;
  tr.z0 = u0;
  tr.z0.insert(tr.z0.end(), v0.begin(), v0.end());
  for (const auto& c : columns) tr.z0.insert(tr.z0.end(), c.begin(), c.end());
  for (std::size_t s = 0; s < normal_axes.size(); ++s) {
    tr.z0.push_back(0.0);
    tr.z0.push_back(1.0);
  }
  if (T <= 0) return tr;
  Dop853Options dopt;
  dopt.rtol = opt.rtol;
  dopt.atol = opt.atol;
  dopt.hmax = opt.hmax;
  const int m = tr.m, cols = tr.columns;
  Dop853 dop(int(tr.z0.size()),
             [&](double, const double* z, double* dz) {
               detail::ambient_rhs(tr.a, m, cols, tr.scalar_axis, z, dz);
             },
             dopt);
  std::vector<double> y = tr.z0;
  dop.integrate(0.0, y, T, {}, [&](const DenseStep& ds, const std::vector<double>&) {
    tr.steps.push_back(ds);
    tr.t_end = ds.t1();
    return !(stop && stop(tr));
  });
  return tr;
}

// Ambient position and unit velocity of a torus covector (sqrt generator only).
inline void ambient_from_covector(const LiouvilleManifold& M, const CovectorState& eta,
                                  std::vector<double>& u, std::vector<double>& v) {
  if (!M.is_ellipsoid()) throw InputError("ambient engine needs A = sqrt(lambda)");
  const int n = M.n();
  EllipsoidEmbedding e = ellipsoid_embed_with_jacobian(M, eta.p);
  std::vector<double> g = metric_at(M, eta.p);
  u = e.u;
  v.assign(n + 1, 0.0);
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k < n; ++k) v[i] += e.du[i][k] * eta.xi[k] / g[k];
}

// First positive zero of the normal Jacobi scalar y'' = -mu y / a_k, y(0) = 0, y'(0) = 1,
// along the ambient geodesic; the geodesic must lie in {u_k = 0}.
struct NormalZero {
  double t = 0;
  std::vector<double> u;  // position at the zero
  AmbientTrace trace;
};

inline NormalZero normal_jacobi_zero(const AxisSpectrum& spec, const std::vector<double>& u0,
                                     const std::vector<double>& v0, int axis, double t_max = 200,
                                     const AmbientOptions& opt = {}) {
  const int m = spec.n() + 1;
  const int yk = 2 * m;
  auto stop = [&](const AmbientTrace& tr) {
    const DenseStep& s = tr.steps.back();
    // y starts at 0 with y' = 1; look for the first sign change after the start
    double ya = s.eval(s.t0, yk), yb = s.eval(s.t1(), yk);
    if (s.t0 == 0.0) ya = s.eval(s.t0 + 1e-3 * s.h, yk);
    return ya > 0 && yb <= 0;
  };
  NormalZero r;
  r.trace = integrate_ambient(spec, u0, v0, t_max, opt, stop, {}, {axis});
  const DenseStep& s = r.trace.steps.back();
  double ya = s.eval(s.t0, yk), yb = s.eval(s.t1(), yk);
  if (!(ya > 0 && yb <= 0)) throw NumericalError("normal Jacobi field has no zero before t_max");
  double ta = s.t0;
  if (ta == 0.0) {
    ta = s.t0 + 1e-3 * s.h;
    ya = s.eval(ta, yk);
  }
  r.t = brent_root([&](double t) { return s.eval(t, yk); }, ta, s.t1(), ya, yb, 1e-15);
  r.u = r.trace.u(r.t);
  return r;
}

namespace detail {

// First sign change of component k of a dense step after t_from, polished with Brent.
inline bool step_zero(const DenseStep& s, int k, double t_from, int samples, double& tz) {
  const double start = std::max(s.t0, t_from);
  if (start >= s.t1()) return false;
  double ta = start, va = s.eval(ta, k);
  for (int j = 1; j <= samples + 1; ++j) {
    double tb = (j == samples + 1) ? s.t1() : start + (s.t1() - start) * j / (samples + 1);
    double vb = s.eval(tb, k);
    if (va != 0 && vb != 0 && (va > 0) != (vb > 0)) {
      tz = brent_root([&](double t) { return s.eval(t, k); }, ta, tb, va, vb, 1e-15);
      return true;
    }
    if (vb == 0 && tb > t_from) {
      tz = tb;
      return true;
    }
    ta = tb;
    va = vb;
  }
  return false;
}

}  // namespace detail

// Cut time from a base point in J_{n-1} (ellipsoid only), with (u0, v0) an ambient
// unit tangent vector. Directions tangent to N_{n-1} use the normal Jacobi zero;
// the others run until lambda_n has gone down to a_n and back up to a_{n-1}, which
// happens at a zero of u_{n-1} following the first zero of u_n.
struct JBaseCut {
  double t0 = 0;
  bool tangent = false;
  std::vector<double> u;
  AmbientTrace trace;
};

inline JBaseCut cut_time_from_J(const AxisSpectrum& a, const std::vector<double>& u0,
                                const std::vector<double>& v0, double t_max = 200,
                                const AmbientOptions& opt = {}) {
  const int n = a.n();
  if (n < 2) throw InputError("J_{n-1} needs n >= 2");
  if (std::abs(u0[n - 1]) > 1e-9 || std::abs(u0[n]) < 1e-12)
    throw InputError("base point is not in J_{n-1}");
  double vn = 0;
  for (double v : v0) vn += v * v;
  vn = std::sqrt(vn);
  JBaseCut r;
  if (std::abs(v0[n - 1]) <= 1e-9 * vn) {
    NormalZero z = normal_jacobi_zero(a, u0, v0, n - 1, t_max, opt);
    r.t0 = z.t;
    r.tangent = true;
    r.u = z.u;
    r.trace = std::move(z.trace);
    return r;
  }
  const double top_tol = 1e-6 * a.width();
  int phase = 0;
  double t_from = 1e-8, t_found = -1;
  auto stop = [&](const AmbientTrace& tr) {
    const DenseStep& s = tr.steps.back();
    for (;;) {
      double tz;
      if (phase == 0) {
        if (!detail::step_zero(s, n, t_from, 4, tz)) return false;
        phase = 1;
        t_from = tz + 1e-12;
        continue;
      }
      if (!detail::step_zero(s, n - 1, t_from, 4, tz)) return false;
      std::vector<double> lam = elliptic_coords(a, tr.u(tz), 1e-8);
      if (a[n - 1] - lam[n - 1] <= top_tol) {
        t_found = tz;
        return true;
      }
      t_from = tz + 1e-12;
    }
  };
  r.trace = integrate_ambient(a, u0, v0, t_max, opt, stop);
  if (t_found < 0) throw NumericalError("cut time not reached within length limit");
  r.t0 = t_found;
  r.u = r.trace.u(t_found);
  return r;
}

// Generic cut time on the ellipsoid, for geodesics the torus stepper cannot follow
// (passages close to J_{n-1}). lambda_n oscillates between a_n (zeros of u_n) and
// top = min(a_{n-1}, b_{n-1}); sigma_n reaches 2 (top - a_n) when lambda_n returns to
// lam0 moving in its initial direction dir, after one visit to a_n.
struct AmbientCut {
  double t0 = 0;
  std::vector<double> u;
  AmbientTrace trace;
};

inline AmbientCut ambient_cut_generic(const AxisSpectrum& a, const std::vector<double>& u0,
                                      const std::vector<double>& v0, double lam0, double top,
                                      int dir, double t_max = 200, const AmbientOptions& opt = {}) {
  const int n = a.n();
  const double tol = 1e-9 * a.width();
  const bool at_top = std::abs(lam0 - top) <= tol;
  const bool at_bottom = std::abs(lam0 - a[n]) <= tol;
  auto lam_n = [&](const AmbientTrace& tr, double t) {
    return elliptic_coords(a, tr.u(t), 1e-8)[n - 1];
  };
  int phase = 0;
  double t_from = 1e-8, t_bottom = -1, t_found = -1;
  auto stop = [&](const AmbientTrace& tr) {
    const DenseStep& s = tr.steps.back();
    double tz;
    if (phase == 0) {
      if (!detail::step_zero(s, n, t_from, 4, tz)) return false;
      if (at_bottom) {
        t_found = tz;
        return true;
      }
      t_bottom = tz;
      phase = 1;
      t_from = tz;
    }
    if (at_top) {
      // the next visit to a_n closes the bracket around the top
      if (detail::step_zero(s, n, t_from + 1e-8, 4, tz)) {
        auto neg = [&](double t) { return -lam_n(tr, t); };
        double lo = t_bottom, hi = tz;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        double fc = neg(c), fd = neg(d);
        while (hi - lo > 1e-10) {
          if (fc < fd) {
            hi = d; d = c; fd = fc; c = hi - gr * (hi - lo); fc = neg(c);
          } else {
            lo = c; c = d; fc = fd; d = lo + gr * (hi - lo); fd = neg(d);
          }
        }
        t_found = 0.5 * (lo + hi);
        return true;
      }
      return false;
    }
    const int S = 4;
    const double start = std::max(s.t0, t_from);
    if (start >= s.t1()) return false;
    auto h = [&](double t) { return lam_n(tr, t) - lam0; };
    double ta = start, ha = h(ta);
    for (int j = 1; j <= S + 1; ++j) {
      double tb = (j == S + 1) ? s.t1() : start + (s.t1() - start) * j / (S + 1);
      double hb = h(tb);
      // crossing in the initial direction: from -dir side to dir side
      if (dir * ha < 0 && dir * hb >= 0) {
        t_found = brent_root(h, ta, tb, ha, hb, 1e-15);
        return true;
      }
      ta = tb;
      ha = hb;
    }
    return false;
  };
  AmbientCut r;
  r.trace = integrate_ambient(a, u0, v0, t_max, opt, stop);
  if (t_found < 0) throw NumericalError("cut time not reached within length limit");
  r.t0 = t_found;
  r.u = r.trace.u(t_found);
  return r;
}

// Zero of the normal Jacobi field along a geodesic in N_n, on the torus cover:
// column with dx = 0, dxi = e_n, watching dx_n.
inline double normal_zero_torus(const LiouvilleManifold& M, const CovectorState& eta,
                                const CutTimeOptions& opt, GeodesicTrace* out = nullptr) {
  const int n = M.n(), N = 2 * n;
  std::vector<double> col(N, 0.0);
  col[n + n - 1] = 1.0;
  const int k = N + n - 1;
  double t_found = -1;
  auto stop = [&](const GeodesicTrace& tr) {
    double tz;
    if (detail::step_zero(tr.steps.back(), k, 1e-8, 4, tz)) {
      t_found = tz;
      return true;
    }
    return false;
  };
  TraceOptions to = opt.trace;
  GeodesicTrace tr = integrate_geodesic(M, eta, opt.t_max, to, stop, {col});
  if (t_found < 0) throw NumericalError("normal Jacobi field has no zero before t_max");
  if (out) *out = std::move(tr);
  return t_found;
}

// Cut time with the degenerate-case fallbacks.
inline CutTimeResult cut_time(const LiouvilleManifold& M, const CovectorState& eta,
                              const CutTimeOptions& opt = {}) {
  const int n = M.n();
  FirstIntegralVector b = b_from_covector(M, eta);
  bool near = false;
  CutCase c = classify_cut_case(M, eta.p, b, &near);
  if (c == CutCase::InJ)
    throw InputError("base point lies in J_{n-1}: use cut_time_from_J with an ambient vector");
  const double wide = 100 * M.deg_tol();
  bool kind_i = c == CutCase::InNn || (c == CutCase::Generic && std::abs(b.bl(n - 1) - M.a(n)) <= wide);

  auto degenerate = [&](CutTimeResult& r) {
    if (kind_i) {
      r.t0 = normal_zero_torus(M, eta, opt, &r.trace);
      return;
    }
    if (!M.is_ellipsoid())
      throw InputError("geodesic inside N_{n-1} through J_{n-1} is only supported for A = sqrt");
    std::vector<double> u, v;
    ambient_from_covector(M, eta, u, v);
    NormalZero z = normal_jacobi_zero(M.spectrum(), u, v, n - 1, opt.t_max);
    r.t0 = z.t;
    r.end_ambient = z.u;
  };

  CutTimeResult r;
  if (c == CutCase::Generic) {
    try {
      r = cut_time_generic(M, eta, opt);
    } catch (const NumericalError& e) {
      if (!M.is_ellipsoid()) throw;
      std::vector<double> u, v;
      ambient_from_covector(M, eta, u, v);
      std::vector<double> z = eta.z();
      double fd = detail::fdot(M, z.data(), n);
      double top = std::min(M.a(n - 1), b.bl(n - 1));
      AmbientCut ac = ambient_cut_generic(M.spectrum(), u, v, eta.p.lambda[n - 1], top,
                                          fd > 0 ? 1 : -1, opt.t_max);
      r = CutTimeResult{};
      r.t0 = ac.t0;
      r.target = 2.0 * (top - M.a(n));
      r.end_ambient = ac.u;
      r.warning = std::string("torus flow failed (") + e.what() + "); ambient engine used";
    }
    r.tag = c;
    if (near) {
      CutTimeResult alt;
      try {
        degenerate(alt);
        r.ambiguous = true;
        r.t0_alt = alt.t0;
        if (!r.warning.empty()) r.warning += "; ";
        r.warning += std::string("case split ambiguous within tolerance; alternative is ") +
                     (kind_i ? cut_case_name(CutCase::InNn) : cut_case_name(CutCase::InNn1));
      } catch (const std::exception& e) {
        if (!r.warning.empty()) r.warning += "; ";
        r.warning += std::string("near a degenerate case; alternative failed: ") + e.what();
      }
    }
    return r;
  }
  r.tag = c;
  degenerate(r);
  return r;
}

}  // namespace liouville

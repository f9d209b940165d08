#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dop853.hpp"
#include "errors.hpp"
#include "hamiltonian.hpp"
#include "model.hpp"
#include "polynomial.hpp"
#include "quadrature.hpp"
#include "roots.hpp"

namespace liouville {

// A covector (x, xi) at a point of the torus cover.
struct CovectorState {
  BandPoint p;
  std::vector<double> xi;

  int n() const { return p.n(); }
  std::vector<double> z() const {
    std::vector<double> z = p.x;
    z.insert(z.end(), xi.begin(), xi.end());
    return z;
  }
};

inline double covector_twice_energy(const CovectorState& eta) {
  return twice_energy(eta.p.lambda, eta.xi);
}

inline CovectorState make_covector(const LiouvilleManifold& M, std::vector<double> x,
                                   std::vector<double> xi) {
  if (int(xi.size()) != M.n()) throw InputError("covector has wrong number of components");
  return {make_point(M, std::move(x)), std::move(xi)};
}

// Rescales xi so that 2E = 1.
inline CovectorState normalize_unit(const LiouvilleManifold& M, CovectorState eta) {
  metric_at(M, eta.p);
  double e2 = covector_twice_energy(eta);
  if (!(e2 > 0)) throw InputError("zero covector cannot be normalized");
  double s = 1.0 / std::sqrt(e2);
  for (double& v : eta.xi) v *= s;
  return eta;
}

inline CovectorState covector_from_state(const LiouvilleManifold& M, const std::vector<double>& z) {
  const int n = M.n();
  std::vector<double> x(z.begin(), z.begin() + n), xi(z.begin() + n, z.begin() + 2 * n);
  return make_covector(M, x, xi);
}

// Reflection in the hyperplane xi_n = 0.
inline CovectorState reflect(const LiouvilleManifold& M, const CovectorState& eta) {
  const int n = M.n();
  SubmanifoldTag tag = classify_point(M, eta.p);
  if (tag.J(n - 1)) throw InputError("reflection undefined: base point lies in J_{n-1}");
  CovectorState r = eta;
  r.xi[n - 1] = -r.xi[n - 1];
  return r;
}

// ---------------------------------------------------------------------------
// First integrals as roots of Theta.

enum RootFlag : int {
  kRegular = 0,
  kAtA = 1,          // b_i = a_i
  kCoincident = 2,   // b_i = b_{i-1} or b_{i+1}
  kAtBase = 4,       // b_i equals f_i or f_{i+1} at the base point
};

struct FirstIntegralVector {
  std::vector<double> b;   // b_1..b_{n-1}
  std::vector<int> flags;  // RootFlag bits per index

  double bl(int l) const { return b[l - 1]; }
  bool generic() const {
    for (int f : flags)
      if (f & (kAtA | kCoincident)) return false;
    return true;
  }
  BandConfig config(const AxisSpectrum& a) const { return BandConfig{a.values(), b}; }
};

// Theta(lambda) = sum_j F_j prod_{k != j}(lambda - a_k) - 2E prod_k (lambda - a_k), k = 1..n-1,
// normalized by 2E; then (-1)^i Theta(f_i) = xi_i^2 / 2E.
inline Polynomial theta_polynomial(const LiouvilleManifold& M, const BandPoint& p,
                                   const std::vector<double>& xi) {
  const int n = M.n();
  std::vector<double> F = first_integrals(M, p, xi);
  double e2 = F[n - 1];
  if (!(e2 > 0)) throw InputError("covector has zero energy");
  std::vector<double> all;
  for (int k = 1; k <= n - 1; ++k) all.push_back(M.a(k));
  Polynomial th = (-1.0) * Polynomial::from_roots(all);
  for (int j = 1; j <= n - 1; ++j) {
    std::vector<double> r;
    for (int k = 1; k <= n - 1; ++k)
      if (k != j) r.push_back(M.a(k));
    th = th + (F[j - 1] / e2) * Polynomial::from_roots(r);
  }
  return th;
}

namespace detail {

inline double poly_scale(const Polynomial& p, double x) {
  double s = 0, xp = 1;
  for (int k = 0; k <= p.degree(); ++k) {
    s += std::abs(p.coeff(k)) * xp;
    xp *= std::abs(x);
  }
  return s;
}

}  // namespace detail

inline FirstIntegralVector b_from_state(const LiouvilleManifold& M, const BandPoint& p,
                                        const std::vector<double>& xi) {
  const int n = M.n();
  Polynomial th = theta_polynomial(M, p, xi);
  const std::vector<double>& f = p.lambda;
  std::vector<double> g = metric_coefficients(f);
  double e2 = 0;
  for (int i = 0; i < n; ++i) e2 += xi[i] * xi[i] / g[i];
  // nodes where Theta vanishes (xi_i = 0) are roots; deflate them
  std::vector<double> roots;
  Polynomial Q = th;
  std::vector<bool> zero(n, false);
  for (int i = 0; i < n; ++i) {
    if (xi[i] * xi[i] / g[i] <= 1e-28 * e2 && Q.degree() >= 1) {
      zero[i] = true;
      roots.push_back(f[i]);
      Q = Q.deflate(f[i]);
    }
  }
  if (Q.degree() >= 1) {
    // a root at a node (a double root when xi_i vanishes) loses its sign in
    // rounding; take it and deflate so the neighbouring intervals still count
    for (int i = 0; i < n && Q.degree() >= 1; ++i) {
      if (std::abs(Q(f[i])) <= 1e-13 * detail::poly_scale(Q, f[i])) {
        roots.push_back(f[i]);
        Q = Q.deflate(f[i]);
      }
    }
    std::vector<double> q(n, 0.0);
    if (Q.degree() >= 1)
      for (int i = 0; i < n; ++i) q[i] = Q(f[i]);
    auto bracketed = [&](const std::vector<double>& qs, std::vector<double>& out) {
      for (int l = 0; l + 1 < n; ++l) {
        double hi = f[l], lo = f[l + 1], qh = qs[l], ql = qs[l + 1];
        if (qh == 0 || ql == 0) continue;
        if ((qh > 0) != (ql > 0)) out.push_back(brent_root([&](double v) { return Q(v); }, lo, hi, ql, qh));
      }
    };
    std::vector<double> found;
    bracketed(q, found);
    if (int(roots.size() + found.size()) != n - 1) {
      // a root within rounding of a node: retry with that node's sign flipped
      int i0 = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        double r = std::abs(q[i]) / detail::poly_scale(Q, f[i]);
        if (q[i] != 0 && r < best) {
          best = r;
          i0 = i;
        }
      }
      if (i0 >= 0 && best <= 1e-9) {
        std::vector<double> q2 = q, alt;
        q2[i0] = -q2[i0];
        bracketed(q2, alt);
        if (int(roots.size() + alt.size()) == n - 1) found = alt;
      }
    }
    roots.insert(roots.end(), found.begin(), found.end());
  }
  if (int(roots.size()) != n - 1) {
    std::ostringstream os;
    os << "first integral roots inconsistent: found " << roots.size() << " of " << n - 1;
    throw NumericalError(os.str());
  }
  std::sort(roots.begin(), roots.end(), std::greater<double>());
  FirstIntegralVector r;
  r.b = roots;
  for (int l = 1; l <= n - 1; ++l)
    r.b[l - 1] = std::clamp(r.b[l - 1], std::max(M.a(l + 1), f[l]), std::min(M.a(l - 1), f[l - 1]));
  double tol = M.deg_tol();
  r.flags.assign(n - 1, kRegular);
  for (int l = 1; l <= n - 1; ++l) {
    int fl = 0;
    double v = r.b[l - 1];
    if (std::abs(v - M.a(l)) <= tol) fl |= kAtA;
    if ((l >= 2 && std::abs(v - r.b[l - 2]) <= tol) || (l <= n - 2 && std::abs(v - r.b[l]) <= tol))
      fl |= kCoincident;
    if (std::abs(v - f[l - 1]) <= tol || std::abs(v - f[l]) <= tol) fl |= kAtBase;
    r.flags[l - 1] = fl;
  }
  return r;
}

inline FirstIntegralVector b_from_covector(const LiouvilleManifold& M, const CovectorState& eta) {
  return b_from_state(M, eta.p, eta.xi);
}

// ---------------------------------------------------------------------------
// Traces.

struct TurningPoint {
  double t;
  double f;      // f_i at the turn
  double sigma;  // sigma_i at the turn
};

struct GeodesicTrace {
  const LiouvilleManifold* M = nullptr;
  int n = 0;
  int columns = 0;                    // variational columns carried along
  std::vector<double> z0;             // initial state (with columns)
  std::vector<DenseStep> steps;
  std::vector<std::vector<TurningPoint>> turns;  // per index, 0-based
  FirstIntegralVector b0;
  double max_b_drift = 0;
  double max_energy_step = 0;
  double t_end = 0;

  int dim() const { return 2 * n * (1 + columns); }

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

  // f_i(x_i(t)), 1-based index.
  double f(int i, double t) const { return M->f(i)(coord(t, i - 1)); }

  double sigma(int i, double t) const {
    const auto& tp = turns[i - 1];
    double s = 0, fref = M->f(i)(z0[i - 1]);
    for (const auto& p : tp) {
      if (p.t > t) break;
      s = p.sigma;
      fref = p.f;
    }
    return s + std::abs(f(i, t) - fref);
  }

  std::vector<double> sigmas(double t) const {
    std::vector<double> s(n);
    for (int i = 1; i <= n; ++i) s[i - 1] = sigma(i, t);
    return s;
  }
};

struct TraceOptions {
  double rtol = 1e-10, atol = 1e-12;
  double energy_step = 1e-11;   // per-step drift of E allowed
  double b_drift_abort = 1e-6;
  bool monitor_b = true;
  double hmax = 0.5;
  int interior_samples = 4;

  static TraceOptions from(const Tolerances& t) {
    TraceOptions o;
    o.rtol = t.rtol;
    o.atol = t.atol;
    o.energy_step = t.energy_step;
    o.b_drift_abort = t.b_drift_abort;
    return o;
  }
};

namespace detail {

// d f_i / dt from a phase state.
inline double fdot(const LiouvilleManifold& M, const double* z, int i) {
  const int n = M.n();
  std::vector<double> lam(n);
  double dl = 0;
  for (int k = 0; k < n; ++k) {
    const CoordinateFunction& f = M.f(k + 1);
    double s, c, ds, dc;
    f.sin_cos(z[k], s, c, ds, dc);
    double d = f.hi() - f.lo();
    lam[k] = f.lo() + d * s * s;
    if (k == i - 1) dl = 2.0 * d * s * ds;
  }
  double g = 1.0;
  for (int l = 0; l < n; ++l)
    if (l != i - 1) g *= lam[l] - lam[i - 1];
  if ((n - i) % 2 == 1) g = -g;
  return dl * z[n + i - 1] / g;
}

}  // namespace detail

// Integrates the geodesic flow (plus optional variational columns) from eta.
//   stop(trace) -> true ends the run after the current step.
inline GeodesicTrace integrate_geodesic(
    const LiouvilleManifold& M, const CovectorState& eta, double T,
    const TraceOptions& opt = {}, const std::function<bool(const GeodesicTrace&)>& stop = {},
    const std::vector<std::vector<double>>& columns = {}) {
  const int n = M.n(), N = 2 * n;
  GeodesicField field(M);
  GeodesicTrace tr;
  tr.M = &M;
  tr.n = n;
  tr.columns = int(columns.size());
  tr.z0 = eta.z();
  for (const auto& c : columns) {
    if (int(c.size()) != N) throw InputError("variational column has wrong length");
    tr.z0.insert(tr.z0.end(), c.begin(), c.end());
  }
  tr.turns.assign(n, {});
  tr.b0 = b_from_covector(M, eta);
  if (T < 0) throw InputError("integration length must be nonnegative");
  if (T == 0) return tr;

  const int k = tr.columns;
  Dop853Options dopt;
  dopt.rtol = opt.rtol;
  dopt.atol = opt.atol;
  dopt.hmax = opt.hmax;
  Dop853 dop(tr.dim(),
             [&](double, const double* z, double* dz) {
               if (k == 0)
                 field.rhs(z, dz);
               else
                 field.variational_rhs(z, dz, k);
             },
             dopt);
  auto energy = [&](const std::vector<double>& z) { return 0.5 * field.twice_energy(z.data()); };
  auto veto = [&](const std::vector<double>& a, const std::vector<double>& b) {
    return std::abs(energy(b) - energy(a)) > opt.energy_step;
  };
  std::vector<double> last_v(n), last_sign(n, 0.0), sig_acc(n, 0.0), fref(n);
  for (int i = 1; i <= n; ++i) {
    last_v[i - 1] = detail::fdot(M, tr.z0.data(), i);
    fref[i - 1] = M.f(i)(tr.z0[i - 1]);
  }
  auto on_step = [&](const DenseStep& ds, const std::vector<double>& y) {
    const int S = opt.interior_samples;
    std::vector<double> ts(S + 2);
    for (int s = 0; s <= S + 1; ++s) ts[s] = ds.t0 + ds.h * s / (S + 1);
    ts[S + 1] = ds.t1();
    std::vector<double> zs(ds.n);
    for (int i = 1; i <= n; ++i) {
      auto vat = [&](double t) {
        ds.eval(t, zs.data());
        return detail::fdot(M, zs.data(), i);
      };
      double va = last_v[i - 1];
      for (int s = 1; s <= S + 1; ++s) {
        double vb = (s == S + 1) ? detail::fdot(M, y.data(), i) : vat(ts[s]);
        if (va != 0 && vb != 0 && (va > 0) != (vb > 0)) {
          double tz = brent_root(vat, ts[s - 1], ts[s], va, vb, 1e-15);
          double fz = M.f(i)(ds.eval(tz, i - 1));
          sig_acc[i - 1] += std::abs(fz - fref[i - 1]);
          fref[i - 1] = fz;
          tr.turns[i - 1].push_back({tz, fz, sig_acc[i - 1]});
        }
        if (vb != 0) va = vb;
      }
      last_v[i - 1] = va;
    }
    tr.steps.push_back(ds);
    tr.t_end = ds.t1();
    double de = std::abs(energy(y) - energy(std::vector<double>(ds.rc.begin(), ds.rc.begin() + ds.n)));
    tr.max_energy_step = std::max(tr.max_energy_step, de);
    if (opt.monitor_b) {
      CovectorState c = covector_from_state(M, y);
      FirstIntegralVector b = b_from_covector(M, c);
      double drift = 0;
      for (int l = 0; l < n - 1; ++l) drift = std::max(drift, std::abs(b.b[l] - tr.b0.b[l]));
      tr.max_b_drift = std::max(tr.max_b_drift, drift);
      if (drift > opt.b_drift_abort) {
        std::ostringstream os;
        os << "first integral drift " << drift << " exceeds abort threshold at t = " << tr.t_end;
        throw NumericalError(os.str());
      }
    }
    return !(stop && stop(tr));
  };
  std::vector<double> y = tr.z0;
  dop.integrate(0.0, y, T, veto, on_step);
  return tr;
}

// ---------------------------------------------------------------------------
// Cut time.

enum class CutCase { Generic, InNn, InNn1, InJ };

inline const char* cut_case_name(CutCase c) {
  switch (c) {
    case CutCase::Generic: return "generic";
    case CutCase::InNn: return "in-N_n";
    case CutCase::InNn1: return "in-N_n-1";
    case CutCase::InJ: return "base-in-J_n-1";
  }
  return "?";
}

struct CutTimeResult {
  double t0 = 0;
  CutCase tag = CutCase::Generic;
  double target = 0;          // sigma_n milestone (generic case)
  bool ambiguous = false;     // case split within tolerance
  double t0_alt = 0;          // other candidate when ambiguous
  std::string warning;
  GeodesicTrace trace;        // integrated at least to t0 (torus engine)
  std::vector<double> end_ambient;  // gamma(t0) in R^{n+1} when computed by the ambient engine
};

// Case of eta with respect to the degenerate patterns of the cut-time definition.
inline CutCase classify_cut_case(const LiouvilleManifold& M, const BandPoint& p,
                                 const FirstIntegralVector& b, bool* near_boundary = nullptr) {
  const int n = M.n();
  const double tol = M.deg_tol();
  double bn1 = b.bl(n - 1), fn = p.lambda[n - 1], fn1 = p.lambda[n - 2];
  bool i_case = std::abs(bn1 - M.a(n)) <= tol;
  bool on_top = std::abs(fn - M.a(n - 1)) <= tol && std::abs(bn1 - M.a(n - 1)) <= tol;
  bool ii_case = on_top && fn1 - M.a(n - 1) > tol;
  bool iii_case = on_top && !ii_case;
  if (near_boundary) {
    double wide = 100 * tol;
    *near_boundary = (!i_case && std::abs(bn1 - M.a(n)) <= wide) ||
                     (!on_top && std::abs(fn - M.a(n - 1)) <= wide &&
                      std::abs(bn1 - M.a(n - 1)) <= wide);
  }
  if (i_case) return CutCase::InNn;
  if (ii_case) return CutCase::InNn1;
  if (iii_case) return CutCase::InJ;
  return CutCase::Generic;
}

struct CutTimeOptions {
  TraceOptions trace;
  double t_max = 200;
  double time_tol = 1e-9;
  double leg_snap = 1e-12;  // relative to the spectrum width
};

// Generic case: first t with sigma_n(t) = 2 (a_{n-1}^- - a_n^+).
inline CutTimeResult cut_time_generic(const LiouvilleManifold& M, const CovectorState& eta,
                                      const CutTimeOptions& opt = {},
                                      const std::vector<std::vector<double>>& columns = {}) {
  const int n = M.n();
  FirstIntegralVector b = b_from_covector(M, eta);
  const double S = 2.0 * (std::min(M.a(n - 1), b.bl(n - 1)) - M.a(n));
  const double snap = opt.leg_snap * M.spectrum().width();
  CutTimeResult res;
  res.target = S;
  auto reached = [&](const GeodesicTrace& tr) {
    const auto& tp = tr.turns[n - 1];
    if (!tp.empty() && tp.back().sigma >= S - M.deg_tol()) return true;
    return tr.sigma(n, tr.t_end) >= S;
  };
  res.trace = integrate_geodesic(M, eta, opt.t_max, opt.trace, reached, columns);
  const GeodesicTrace& tr = res.trace;
  // a leg end landing on the milestone
  for (const auto& p : tr.turns[n - 1]) {
    if (std::abs(p.sigma - S) <= snap) {
      res.t0 = p.t;
      return res;
    }
    if (p.sigma > S) break;
  }
  if (tr.sigma(n, tr.t_end) < S - M.deg_tol()) {
    std::ostringstream os;
    os << "cut time not reached within length " << opt.t_max;
    throw NumericalError(os.str());
  }
  // bracket: last turn (or start) below S and the end of its leg
  double ta = 0, tb = tr.t_end;
  const double wide = M.deg_tol();
  for (const auto& p : tr.turns[n - 1]) {
    if (p.sigma < S - wide)
      ta = p.t;
    else {
      tb = p.t;
      break;
    }
  }
  // The cut point is where lambda_n is back at its initial value; solving that on
  // the selected leg is better conditioned than the sigma milestone near a turn.
  // When the leg ends at a turn, the value there carries the integration drift of
  // b; shifting the target by it keeps near-tangent crossings on the right side.
  double lam0 = eta.p.lambda[n - 1];
  bool tb_turn = false;
  for (const auto& p : tr.turns[n - 1])
    if (p.t == tb) {
      tb_turn = true;
      double top = 0.5 * S + M.a(n);
      double nominal = std::abs(p.f - M.a(n)) < std::abs(p.f - top) ? M.a(n) : top;
      lam0 += p.f - nominal;
    }
  auto G = [&](double t) { return tr.f(n, t) - lam0; };
  double ga = G(ta), gb = G(tb);
  if (tb_turn && std::abs(gb) <= 1e-15 * M.spectrum().width()) {
    res.t0 = tb;
    return res;
  }
  if (ta > 0 && ga != 0 && gb != 0 && (ga > 0) != (gb > 0)) {
    res.t0 = brent_root(G, ta, tb, ga, gb, 1e-15);
    return res;
  }
  auto F = [&](double t) { return tr.sigma(n, t) - S; };
  res.t0 = brent_root(F, ta, tb, F(ta), F(tb), 1e-15);
  return res;
}

}  // namespace liouville

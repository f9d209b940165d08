#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "geodesic.hpp"
#include "sigma.hpp"

namespace liouville {

// Solutions of the linearized flow along a geodesic. Column c at time t is
// (dx_1..dx_n, dxi_1..dxi_n); the position block P(t) holds the dx parts.
struct LinearizedFrame {
  GeodesicTrace trace;
  std::vector<std::vector<double>> seeds;  // initial dxi of each column (dx = 0)

  int n() const { return trace.n; }
  int k() const { return trace.columns; }

  std::vector<double> column(const std::vector<double>& z, int c) const {
    const int N = 2 * n();
    return {z.begin() + N + c * N, z.begin() + N + (c + 1) * N};
  }
  std::vector<double> column(double t, int c) const { return column(trace.state(t), c); }

  Eigen::MatrixXd P(double t) const {
    std::vector<double> z = trace.state(t);
    Eigen::MatrixXd m(n(), k());
    for (int c = 0; c < k(); ++c)
      for (int r = 0; r < n(); ++r) m(r, c) = z[2 * n() + c * 2 * n() + r];
    return m;
  }
  Eigen::MatrixXd Q(double t) const {
    std::vector<double> z = trace.state(t);
    Eigen::MatrixXd m(n(), k());
    for (int c = 0; c < k(); ++c)
      for (int r = 0; r < n(); ++r) m(r, c) = z[2 * n() + c * 2 * n() + n() + r];
    return m;
  }
};

struct LinearizedOptions {
  TraceOptions trace;
  LinearizedOptions() {
    trace.rtol = 1e-12;
    trace.atol = 1e-14;
  }
};

// Columns seeded with dx = 0 and dxi = seeds[c]; default seeds are e_1..e_n.
inline LinearizedFrame linearized_flow(const LiouvilleManifold& M, const CovectorState& eta,
                                       double T, std::vector<std::vector<double>> seeds = {},
                                       const LinearizedOptions& opt = {},
                                       const std::function<bool(const GeodesicTrace&)>& stop = {}) {
  const int n = M.n();
  if (seeds.empty())
    for (int k = 0; k < n; ++k) {
      std::vector<double> e(n, 0.0);
      e[k] = 1.0;
      seeds.push_back(e);
    }
  std::vector<std::vector<double>> cols;
  for (const auto& s : seeds) {
    if (int(s.size()) != n) throw InputError("seed has wrong length");
    std::vector<double> c(2 * n, 0.0);
    std::copy(s.begin(), s.end(), c.begin() + n);
    cols.push_back(c);
  }
  LinearizedFrame f;
  f.seeds = seeds;
  f.trace = integrate_geodesic(M, eta, T, opt.trace, stop, cols);
  return f;
}

// Omega(c1, c2) = dx1 . dxi2 - dxi1 . dx2.
inline double omega(const std::vector<double>& c1, const std::vector<double>& c2) {
  const int n = int(c1.size()) / 2;
  double s = 0;
  for (int i = 0; i < n; ++i) s += c1[i] * c2[n + i] - c1[n + i] * c2[i];
  return s;
}

// Largest change of Omega over all column pairs at `samples` evenly spaced times.
inline double omega_drift(const LinearizedFrame& f, int samples = 50) {
  const int k = f.k();
  double T = f.trace.t_end, drift = 0;
  std::vector<double> z0 = f.trace.z0;
  for (int s = 1; s <= samples; ++s) {
    std::vector<double> z = f.trace.state(T * s / samples);
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        double w0 = omega(f.column(z0, a), f.column(z0, b));
        double w = omega(f.column(z, a), f.column(z, b));
        drift = std::max(drift, std::abs(w - w0));
      }
  }
  return drift;
}

// ---------------------------------------------------------------------------
// Transversal block and conjugate points.

namespace detail {

inline std::vector<double> sqrt_metric(const LiouvilleManifold& M, const double* x) {
  const int n = M.n();
  std::vector<double> lam(n);
  for (int i = 0; i < n; ++i) lam[i] = M.f(i + 1)(x[i]);
  std::vector<double> g = metric_coefficients(lam);
  for (double& v : g) v = std::sqrt(std::max(v, 0.0));
  return g;
}

}  // namespace detail

// n - 1 fiber directions orthogonal to xi for the inverse metric, orthonormal.
inline std::vector<std::vector<double>> transversal_seeds(const LiouvilleManifold& M,
                                                          const CovectorState& eta) {
  const int n = M.n();
  std::vector<double> sg = detail::sqrt_metric(M, eta.p.x.data());
  Eigen::VectorXd e0(n);
  for (int i = 0; i < n; ++i) e0(i) = eta.xi[i] / sg[i];
  e0.normalize();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  A.col(0) = e0;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Qm = qr.householderQ();
  std::vector<std::vector<double>> out;
  for (int c = 1; c < n; ++c) {
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = sg[i] * Qm(i, c);
    out.push_back(d);
  }
  return out;
}

struct TransversalBlock {
  double det = 0;                  // det[e, W] with e the unit velocity in the sqrt(g) frame
  Eigen::VectorXd sv;              // singular values of the projected block, descending
  Eigen::MatrixXd V;               // right singular vectors (column space coefficients)
};

inline TransversalBlock transversal_block(const LiouvilleManifold& M, const std::vector<double>& z,
                                          int columns) {
  const int n = M.n(), N = 2 * n;
  std::vector<double> sg = detail::sqrt_metric(M, z.data());
  Eigen::VectorXd e(n);
  for (int i = 0; i < n; ++i) e(i) = z[n + i] / sg[i];
  e.normalize();
  Eigen::MatrixXd W(n, columns);
  for (int c = 0; c < columns; ++c)
    for (int i = 0; i < n; ++i) W(i, c) = sg[i] * z[N + c * N + i];
  Eigen::MatrixXd Wp = W - e * (e.transpose() * W);
  TransversalBlock b;
  if (columns == n - 1) {
    Eigen::MatrixXd D(n, n);
    D.col(0) = e;
    D.rightCols(n - 1) = Wp;
    b.det = D.determinant();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Wp, Eigen::ComputeFullV);
  b.sv = svd.singularValues();
  b.V = svd.matrixV();
  return b;
}

// Fiber direction of d/dH_i at a state (H_i = b_i, energy fixed), normalized for the
// inverse metric. At s in S_i (f_i = b_i or f_{i+1} = b_i) this is the nu_i direction e_k.
inline std::vector<double> family_direction(const LiouvilleManifold& M, const CovectorState& eta,
                                            const FirstIntegralVector& b, int i) {
  const int n = M.n();
  const double tol = M.deg_tol();
  const double bi = b.bl(i);
  std::vector<double> d(n, 0.0);
  int hit = -1;
  if (std::abs(eta.p.lambda[i - 1] - bi) <= tol) hit = i - 1;
  if (std::abs(eta.p.lambda[i] - bi) <= tol) hit = i;
  if (hit >= 0) {
    d[hit] = eta.xi[hit] < 0 ? -1.0 : 1.0;
  } else {
    for (int k = 0; k < n; ++k) {
      double f = eta.p.lambda[k], Pi = 1.0;
      for (int l = 1; l <= n - 1; ++l)
        if (l != i) Pi *= f - b.bl(l);
      double sx = eta.xi[k] < 0 ? -1.0 : 1.0;
      double sk = ((k + 1) % 2 == 0) ? 1.0 : -1.0;
      double sp = Pi < 0 ? -1.0 : 1.0;
      d[k] = sx * sk * sp * std::sqrt(std::abs(Pi)) / std::sqrt(2.0 * std::abs(f - bi));
    }
  }
  std::vector<double> sg = detail::sqrt_metric(M, eta.p.x.data());
  double nn = 0;
  for (int k = 0; k < n; ++k) nn += d[k] * d[k] / (sg[k] * sg[k]);
  nn = std::sqrt(nn);
  for (double& v : d) v /= nn;
  return d;
}

struct ConjugateEvent {
  double t = 0;
  int multiplicity = 0;
  int family = -1;          // index i of the integral family when identifiable
  bool cluster = false;     // merged from events closer than the time tolerance
  bool s_aligned = false;   // t lies in S_family
  double smin = 0;          // relative smallest singular value at t
};

struct ConjugateOptions {
  LinearizedOptions lin;
  int samples_per_step = 4;
  double mult_tol = 1e-7;      // singular values below mult_tol * max count toward multiplicity
  double min_ratio = 1e-6;     // minima of smin / smax below this are events
  double time_tol = 1e-9;
  double t_start = 1e-3;       // sign tracking starts here (P ~ t near 0)
};

struct ConjugateScan {
  std::vector<ConjugateEvent> events;
  LinearizedFrame frame;
};

// S_i: times where f_i turns at b_i (b_i = a_i^+) or f_{i+1} turns at b_i (b_i = a_i^-).
inline std::vector<double> s_set(const GeodesicTrace& tr, int i, double tol) {
  const LiouvilleManifold& M = *tr.M;
  const double bi = tr.b0.bl(i);
  std::vector<double> out;
  int k = (bi >= M.a(i)) ? i : i + 1;
  for (const auto& p : tr.turns[k - 1])
    if (std::abs(p.f - bi) <= tol) out.push_back(p.t);
  // the start itself when the base covector sits on S_i
  if (std::abs(M.f(k)(tr.z0[k - 1]) - bi) <= tol &&
      std::abs(detail::fdot(M, tr.z0.data(), k)) <= 1e-9)
    out.insert(out.begin(), 0.0);
  return out;
}

inline ConjugateScan conjugate_points(const LiouvilleManifold& M, const CovectorState& eta,
                                      double T, const ConjugateOptions& opt = {}) {
  const int n = M.n();
  ConjugateScan scan;
  if (n < 2) return scan;
  std::vector<std::vector<double>> seeds = transversal_seeds(M, eta);
  scan.frame = linearized_flow(M, eta, T, seeds, opt.lin);
  const LinearizedFrame& F = scan.frame;
  const int k = n - 1;
  auto block = [&](double t) { return transversal_block(M, F.trace.state(t), k); };
  auto det_at = [&](double t) { return block(t).det; };
  auto ratio_at = [&](double t) {
    TransversalBlock b = block(t);
    return b.sv(k - 1) / b.sv(0);
  };
  // sample times
  std::vector<double> ts;
  for (const auto& s : F.trace.steps)
    for (int j = 0; j <= opt.samples_per_step; ++j) {
      double t = s.t0 + s.h * j / (opt.samples_per_step + 1);
      if (t >= opt.t_start) ts.push_back(t);
    }
  ts.push_back(F.trace.t_end);
  std::vector<double> found;
  std::vector<double> dets(ts.size()), ratios(ts.size());
  for (std::size_t q = 0; q < ts.size(); ++q) {
    TransversalBlock b = block(ts[q]);
    dets[q] = b.det;
    ratios[q] = b.sv(k - 1) / b.sv(0);
  }
  for (std::size_t q = 1; q < ts.size(); ++q) {
    if (dets[q - 1] != 0 && dets[q] != 0 && (dets[q - 1] > 0) != (dets[q] > 0))
      found.push_back(brent_root(det_at, ts[q - 1], ts[q], dets[q - 1], dets[q], 1e-15));
    else if (q + 1 < ts.size() && ratios[q] < 1e-3 && ratios[q] <= ratios[q - 1] &&
             ratios[q] <= ratios[q + 1]) {
      // even-multiplicity zeros do not change the sign of det
      double lo = ts[q - 1], hi = ts[q + 1];
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
      double fc = ratio_at(c), fd = ratio_at(d);
      while (hi - lo > 1e-11) {
        if (fc < fd) {
          hi = d; d = c; fd = fc; c = hi - gr * (hi - lo); fc = ratio_at(c);
        } else {
          lo = c; c = d; fc = fd; d = lo + gr * (hi - lo); fd = ratio_at(d);
        }
      }
      double tm = 0.5 * (lo + hi);
      if (ratio_at(tm) < opt.min_ratio) found.push_back(tm);
    }
  }
  std::sort(found.begin(), found.end());
  // family directions at the start, for labeling
  FirstIntegralVector b0 = F.trace.b0;
  std::vector<std::vector<double>> fam;
  for (int i = 1; i <= n - 1; ++i) fam.push_back(family_direction(M, eta, b0, i));
  std::vector<double> sg = detail::sqrt_metric(M, eta.p.x.data());
  for (double t : found) {
    if (!scan.events.empty() && t - scan.events.back().t <= opt.time_tol) {
      scan.events.back().cluster = true;
      continue;
    }
    TransversalBlock b = block(t);
    ConjugateEvent ev;
    ev.t = t;
    ev.smin = b.sv(k - 1) / b.sv(0);
    for (int j = 0; j < k; ++j)
      if (b.sv(j) <= opt.mult_tol * b.sv(0)) ++ev.multiplicity;
    ev.multiplicity = std::max(ev.multiplicity, 1);
    // kernel direction in terms of the initial dxi
    std::vector<double> d0(n, 0.0);
    for (int c = 0; c < k; ++c)
      for (int i = 0; i < n; ++i) d0[i] += b.V(c, k - 1) * seeds[c][i];
    double best = 0;
    for (int i = 0; i < n - 1; ++i) {
      double dot = 0, n1 = 0, n2 = 0;
      for (int m = 0; m < n; ++m) {
        double w = 1.0 / (sg[m] * sg[m]);
        dot += d0[m] * fam[i][m] * w;
        n1 += d0[m] * d0[m] * w;
        n2 += fam[i][m] * fam[i][m] * w;
      }
      double cs = std::abs(dot) / std::sqrt(n1 * n2);
      if (cs > best) {
        best = cs;
        ev.family = i + 1;
      }
    }
    if (best < 0.99) ev.family = -1;
    if (ev.family > 0) {
      for (double s : s_set(F.trace, ev.family, M.deg_tol()))
        if (std::abs(s - t) <= 1e-6) ev.s_aligned = true;
    }
    scan.events.push_back(ev);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// The fields Y_{i,s}: Y(s) = 0, Y'(s) along the d/dH_i direction.

struct FamilyField {
  double s = 0;
  LinearizedFrame frame;  // started at gamma(s), time shifted by s
  std::vector<double> zeros;  // absolute times in (s, s + T]

  // |Y(t)| in the metric, t absolute.
  double norm(const LiouvilleManifold& M, double t) const {
    std::vector<double> z = frame.trace.state(t - s);
    std::vector<double> sg = detail::sqrt_metric(M, z.data());
    const int n = M.n();
    double q = 0;
    for (int i = 0; i < n; ++i) q += sg[i] * sg[i] * z[2 * n + i] * z[2 * n + i];
    return std::sqrt(q);
  }
};

inline FamilyField family_field(const LiouvilleManifold& M, const GeodesicTrace& tr, int i,
                                double s, double t_end, const LinearizedOptions& opt = {},
                                int samples_per_step = 4) {
  const int n = M.n();
  std::vector<double> zs = tr.state(s);
  zs.resize(2 * n);
  CovectorState eta = covector_from_state(M, zs);
  std::vector<double> d = family_direction(M, eta, tr.b0, i);
  FamilyField Y;
  Y.s = s;
  LinearizedOptions o = opt;
  o.trace.monitor_b = false;
  Y.frame = linearized_flow(M, eta, t_end - s, {d}, o);
  const auto& T = Y.frame.trace;
  auto dx = [&](double t) {
    std::vector<double> z = T.state(t);
    return std::vector<double>(z.begin() + 2 * n, z.begin() + 3 * n);
  };
  // Y stays on a line field; zeros show up as reversals of its direction
  std::vector<double> ts;
  for (const auto& st : T.steps)
    for (int j = 1; j <= samples_per_step + 1; ++j) ts.push_back(st.t0 + st.h * j / (samples_per_step + 1));
  std::vector<double> prev;
  double tprev = 0;
  for (double t : ts) {
    std::vector<double> w = dx(t);
    double nw = 0;
    for (double v : w) nw += v * v;
    nw = std::sqrt(nw);
    if (nw == 0) continue;
    for (double& v : w) v /= nw;
    if (!prev.empty()) {
      double c = 0;
      for (int q = 0; q < n; ++q) c += prev[q] * w[q];
      if (c < 0) {
        std::vector<double> ref = prev;
        auto phi = [&](double u) {
          std::vector<double> x = dx(u);
          double r = 0;
          for (int q = 0; q < n; ++q) r += x[q] * ref[q];
          return r;
        };
        double tz = brent_root(phi, tprev, t, 1e-15);
        Y.zeros.push_back(tz + s);
      }
    }
    prev = w;
    tprev = t;
  }
  return Y;
}

struct ZeroPatternReport {
  bool s1_in_S = false;
  std::vector<double> S;       // S_i in (s1, T)
  std::vector<double> zeros;   // zeros of Y_{i,s1}
  double max_alignment_error = 0;  // s1 in S_i: zeros vs S_i
  bool interlace_ok = true;        // s1 not in S_i: one S_i element between zeros
  bool inconclusive = false;
  bool pass = false;
};

inline ZeroPatternReport zero_pattern_audit(const LiouvilleManifold& M, const GeodesicTrace& tr,
                                            int i, double s1, double T,
                                            const LinearizedOptions& opt = {}) {
  ZeroPatternReport r;
  const double tol = M.deg_tol();
  std::vector<double> S = s_set(tr, i, tol);
  for (double s : S) {
    if (std::abs(s - s1) <= 1e-9) r.s1_in_S = true;
    if (s > s1 + 1e-9 && s < T) r.S.push_back(s);
  }
  FamilyField Y = family_field(M, tr, i, s1, T, opt);
  r.zeros = Y.zeros;
  if (r.s1_in_S) {
    // zeros near T may be cut off; compare the common range
    std::size_t m = std::min(r.S.size(), r.zeros.size());
    if (std::max(r.S.size(), r.zeros.size()) - m > 1) r.pass = false;
    for (std::size_t q = 0; q < m; ++q)
      r.max_alignment_error = std::max(r.max_alignment_error, std::abs(r.S[q] - r.zeros[q]));
    bool tail_ok = r.S.size() == r.zeros.size() ||
                   (r.S.size() > m ? T - r.S[m] < 1e-3 : T - r.zeros[m] < 1e-3);
    r.pass = r.max_alignment_error <= 1e-6 && tail_ok && m > 0;
    if (m == 0) r.inconclusive = true;
  } else {
    for (std::size_t q = 0; q + 1 < r.zeros.size(); ++q) {
      int cnt = 0;
      for (double s : r.S)
        if (s > r.zeros[q] && s < r.zeros[q + 1]) ++cnt;
      if (cnt != 1) r.interlace_ok = false;
      if (r.zeros[q + 1] - r.zeros[q] < 1e-6) r.inconclusive = true;
    }
    if (r.zeros.size() < 2) r.inconclusive = true;
    r.pass = r.interlace_ok;
  }
  return r;
}

// ---------------------------------------------------------------------------
// theta_{s1}(s2) for a geodesic with b_j = b_{j-1} = lambda_j^0.

inline double compute_theta(const GeodesicTrace& tr, double s1, double s2, int j,
                            const QuadOptions& qopt = {}) {
  const LiouvilleManifold& M = *tr.M;
  const int n = M.n();
  if (j < 2 || j > n - 1) throw InputError("compute_theta: need 2 <= j <= n - 1");
  const double bj = tr.b0.bl(j), bj1 = tr.b0.bl(j - 1);
  if (std::abs(bj - bj1) > M.deg_tol())
    throw InputError("compute_theta: b_j and b_{j-1} are not degenerate");
  if (s1 == s2) return 0.0;
  const double lam0 = 0.5 * (bj + bj1);
  std::vector<double> b = tr.b0.b;
  b[j - 1] = b[j - 2] = lam0;
  BandConfig cfg{M.spectrum().values(), b};
  std::vector<double> roots;
  for (int k = 1; k <= n - 1; ++k)
    if (k != j && k != j - 1) roots.push_back(b[k - 1]);
  Polynomial G = Polynomial::from_roots(roots);
  std::function<double(double)> W = [&M](double lam) { return M.A()(lam); };
  double sum = 0;
  for (int l = 1; l <= n; ++l) {
    if (l == j) continue;
    sum += alt_sign(l) * sigma_leg_sum(tr, PeriodIntegrand{G, W, cfg, l}, s1, s2, qopt).value;
  }
  double rad = 1.0;
  for (double r : roots) rad *= lam0 - r;
  for (int k = 0; k <= n; ++k) rad *= lam0 - M.a(k);
  double coef = 2.0 * alt_sign(j) * G(lam0) * M.A()(lam0) / std::sqrt(std::abs(rad));
  return -sum / coef;
}

}  // namespace liouville

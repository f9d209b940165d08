#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ambient.hpp"
#include "ellipsoid.hpp"
#include "jacobi.hpp"
#include "parallel.hpp"

namespace liouville {

// ---------------------------------------------------------------------------
// Small vector helpers (ambient space R^{n+1}).

namespace vec {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }
inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}
inline void axpy(std::vector<double>& y, double c, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}
inline void normalize(std::vector<double>& v) {
  double s = norm(v);
  for (double& q : v) q /= s;
}
inline std::vector<double> sub(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

// Distance from p to segment [a, b]; s receives the parameter in [0, 1].
inline double point_segment(const std::vector<double>& p, const std::vector<double>& a,
                            const std::vector<double>& b, double* s = nullptr) {
  std::vector<double> d = sub(b, a), w = sub(p, a);
  double dd = dot(d, d);
  double t = dd > 0 ? std::clamp(dot(w, d) / dd, 0.0, 1.0) : 0.0;
  if (s) *s = t;
  std::vector<double> c = a;
  axpy(c, t, d);
  return dist(p, c);
}

inline double point_triangle(const std::vector<double>& p, const std::vector<double>& a,
                             const std::vector<double>& b, const std::vector<double>& c) {
  std::vector<double> e1 = sub(b, a), e2 = sub(c, a), w = sub(p, a);
  double g11 = dot(e1, e1), g12 = dot(e1, e2), g22 = dot(e2, e2);
  double r1 = dot(w, e1), r2 = dot(w, e2), det = g11 * g22 - g12 * g12;
  if (det > 1e-300) {
    double s = (r1 * g22 - r2 * g12) / det, t = (r2 * g11 - r1 * g12) / det;
    if (s >= 0 && t >= 0 && s + t <= 1) {
      std::vector<double> q = a;
      axpy(q, s, e1);
      axpy(q, t, e2);
      return dist(p, q);
    }
  }
  return std::min({point_segment(p, a, b), point_segment(p, b, c), point_segment(p, c, a)});
}

// Distance between segments [a, b] and [c, d] (alternating projections, then endpoint checks).
inline double segment_segment(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& c, const std::vector<double>& d) {
  std::vector<double> u = sub(b, a), v = sub(d, c), w = sub(a, c);
  double A = dot(u, u), B = dot(u, v), C = dot(v, v), D = dot(u, w), E = dot(v, w);
  double den = A * C - B * B;
  double best = std::min({point_segment(a, c, d), point_segment(b, c, d), point_segment(c, a, b),
                          point_segment(d, a, b)});
  if (den > 1e-300) {
    double s = (B * E - C * D) / den, t = (A * E - B * D) / den;
    if (s > 0 && s < 1 && t > 0 && t < 1) {
      std::vector<double> p = a, q = c;
      axpy(p, s, u);
      axpy(q, t, v);
      best = std::min(best, dist(p, q));
    }
  }
  return best;
}

}  // namespace vec

// Position used for distances between points of M: the ellipsoid embedding for
// A = sqrt, and the same formula (a smooth embedding, not isometric) otherwise.
inline std::vector<double> embed_point(const LiouvilleManifold& M, const BandPoint& p) {
  return ellipsoid_embed_with_jacobian(M, p).u;
}

// Unit covector at p with components q in the orthonormal frame xi_i / sqrt(g_i).
inline CovectorState covector_at(const LiouvilleManifold& M, const BandPoint& p,
                                 const std::vector<double>& q) {
  std::vector<double> g = metric_at(M, p);
  std::vector<double> xi(M.n());
  for (int i = 0; i < M.n(); ++i) xi[i] = std::sqrt(g[i]) * q[i];
  return {p, xi};
}

// ---------------------------------------------------------------------------
// Hemisphere grid: geodesic polar coordinates about the xi_n pole.

struct HemisphereSample {
  int ring = 0;           // n = 3: 0 is the pole, n_rad the boundary; n = 2: index along the arc
  int slot = 0;
  bool boundary = false;  // q_n = 0 exactly
  std::vector<double> q;  // unit, q_n >= 0
};

struct HemisphereGrid {
  int n = 0, n_rad = 0, n_ang = 0;
  std::vector<HemisphereSample> samples;
  std::vector<std::vector<int>> cells;   // triangles for n = 3, segments for n = 2
  std::vector<int> boundary_loop;        // boundary samples in order
};

inline HemisphereGrid hemisphere_grid(int n, int n_rad, int n_ang) {
  if (n_rad < 1) throw InputError("hemisphere grid needs n_rad >= 1");
  HemisphereGrid G;
  G.n = n;
  G.n_rad = n_rad;
  const double pi = std::numbers::pi;
  if (n == 2) {
    G.n_ang = 2;
    const int K = 2 * n_rad;
    for (int k = 0; k <= K; ++k) {
      HemisphereSample s;
      s.ring = k;
      s.boundary = (k == 0 || k == K);
      double th = -0.5 * pi + pi * k / K;
      s.q = {std::sin(th), std::cos(th)};
      if (s.boundary) s.q = {k == 0 ? -1.0 : 1.0, 0.0};
      if (k == n_rad) s.q = {0.0, 1.0};
      G.samples.push_back(s);
      if (k > 0) G.cells.push_back({k - 1, k});
    }
    G.boundary_loop = {0, K};
    return G;
  }
  if (n != 3) throw InputError("cut-locus meshes are implemented for n = 2 and n = 3");
  if (n_ang < 3) throw InputError("hemisphere grid needs n_ang >= 3");
  G.n_ang = n_ang;
  G.samples.push_back({0, 0, false, {0.0, 0.0, 1.0}});
  auto idx = [&](int r, int j) { return 1 + (r - 1) * n_ang + (j % n_ang); };
  for (int r = 1; r <= n_rad; ++r) {
    double rho = 0.5 * pi * r / n_rad;
    for (int j = 0; j < n_ang; ++j) {
      double phi = 2.0 * pi * j / n_ang;
      HemisphereSample s;
      s.ring = r;
      s.slot = j;
      s.boundary = (r == n_rad);
      if (s.boundary)
        s.q = {std::cos(phi), std::sin(phi), 0.0};
      else
        s.q = {std::sin(rho) * std::cos(phi), std::sin(rho) * std::sin(phi), std::cos(rho)};
      G.samples.push_back(s);
    }
  }
  for (int j = 0; j < n_ang; ++j) G.cells.push_back({0, idx(1, j), idx(1, j + 1)});
  for (int r = 1; r < n_rad; ++r)
    for (int j = 0; j < n_ang; ++j) {
      int a = idx(r, j), b = idx(r, j + 1), c = idx(r + 1, j), d = idx(r + 1, j + 1);
      G.cells.push_back({a, c, d});
      G.cells.push_back({a, d, b});
    }
  for (int j = 0; j < n_ang; ++j) G.boundary_loop.push_back(idx(n_rad, j));
  return G;
}

// ---------------------------------------------------------------------------
// Mesh.

struct CutVertex {
  int ring = 0, slot = 0;
  bool boundary = false;
  std::vector<double> q;       // hemisphere coordinates used (after nudging)
  std::vector<double> xi;      // initial covector at p0 (torus components; empty for J bases)
  std::vector<double> v0;      // initial ambient direction (J bases only)
  bool ok = false;
  std::string error;           // set for holes
  double t0 = 0;
  std::vector<double> x;       // cut point, torus coordinates
  std::vector<double> lambda;  // cut point, elliptic coordinates
  std::vector<double> u;       // cut point, embed_point (ambient when A = sqrt)
  std::string tag;             // "first-conjugate", "two-geodesic" or "circle-family"
  int conj_mult = -1;          // measured at t0; -1 when not measured
  double lambda_dev = 0;       // |lambda_n - lambda_n(p0)|, or distance to a_{n-1} for J bases
  double pair_gap = 0;         // |gamma(t0, eta) - gamma(t0', eta')|
  double pair_dt = 0;          // |t0 - t0'|
  double s1_spread = 0;        // J bases: spread over the S^1 family
  bool nudged = false;
  std::string cut_case;
  std::string warning;
};

struct CutLocusMesh {
  int n = 0;
  std::vector<double> spectrum;
  std::string generator;
  bool degenerate = false;       // base point in J_{n-1}
  int n_rad = 0, n_ang = 0;
  std::vector<double> p0_x, p0_lambda, p0_u;
  std::vector<CutVertex> vertices;
  std::vector<std::vector<int>> cells;
  std::vector<int> boundary_loop;

  int holes() const {
    int h = 0;
    for (const auto& v : vertices) h += !v.ok;
    return h;
  }
  // Position used for geometric checks.
  const std::vector<double>& pos(int i) const { return vertices[i].u; }
};

struct CutLocusOptions {
  CutTimeOptions cut;
  int workers = 1;
  bool pairs = true;              // compute the reflected geodesic for interior samples
  bool measure_conjugacy = true;  // transversal singular values at t0
  double conj_tol = 1e-6;         // relative singular value counted as a kernel direction
  bool normalize = true;          // move p0 to the fundamental domain 0 <= x_i <= alpha_i / 4
  int nudge_tries = 4;
};

namespace detail {

inline std::string append_warning(const std::string& w, const std::string& more) {
  return w.empty() ? more : w + "; " + more;
}

// Number of transversal singular values at t that are below tol times the largest
// one at t / 2.
inline int torus_kernel_dim(const LiouvilleManifold& M, const CovectorState& eta, double t,
                            double tol) {
  const int n = M.n();
  std::vector<std::vector<double>> seeds = transversal_seeds(M, eta);
  LinearizedFrame F = linearized_flow(M, eta, t, seeds);
  TransversalBlock ref = transversal_block(M, F.trace.state(0.5 * t), n - 1);
  TransversalBlock b = transversal_block(M, F.trace.state(t), n - 1);
  int m = 0;
  for (int j = 0; j < n - 1; ++j)
    if (b.sv(j) <= tol * ref.sv(0)) ++m;
  return m;
}

struct CutEnd {
  double t0 = 0;
  BandPoint end;
  std::vector<double> pos;  // embed_point of the end
  CutTimeResult res;
};

inline CutEnd cut_end(const LiouvilleManifold& M, const CovectorState& eta, const CutTimeOptions& o) {
  CutEnd e;
  e.res = cut_time(M, eta, o);
  e.t0 = e.res.t0;
  if (!e.res.end_ambient.empty()) {
    e.end = torus_from_ambient(M, e.res.end_ambient);
    e.pos = e.res.end_ambient;
  } else {
    std::vector<double> z = e.res.trace.state(e.t0);
    std::vector<double> x(z.begin(), z.begin() + M.n());
    for (int i = 0; i < M.n(); ++i) x[i] = wrap_period(x[i], M.alpha(i + 1));
    e.end = make_point(M, x);
    e.pos = embed_point(M, e.end);
  }
  return e;
}

}  // namespace detail

inline CutVertex cut_vertex(const LiouvilleManifold& M, const BandPoint& p0,
                            const HemisphereSample& s, const CutLocusOptions& o) {
  const int n = M.n();
  CutVertex v;
  v.ring = s.ring;
  v.slot = s.slot;
  v.boundary = s.boundary;
  v.q = s.q;
  v.tag = s.boundary ? "first-conjugate" : "two-geodesic";
  try {
    CovectorState eta = covector_at(M, p0, v.q);
    // interior samples close to a degenerate case split are moved toward the pole
    if (!s.boundary) {
      for (int k = 1; k <= o.nudge_tries; ++k) {
        bool near = false;
        classify_cut_case(M, p0, b_from_covector(M, eta), &near);
        if (!near) break;
        double d = 10.0 * std::pow(10.0, k - 1) * M.tol().degeneracy;
        v.q[n - 1] += d;
        vec::normalize(v.q);
        eta = covector_at(M, p0, v.q);
        v.nudged = true;
      }
    }
    v.xi = eta.xi;
    detail::CutEnd e = detail::cut_end(M, eta, o.cut);
    v.t0 = e.t0;
    v.x = e.end.x;
    v.lambda = e.end.lambda;
    v.u = e.pos;
    v.cut_case = cut_case_name(e.res.tag);
    v.warning = e.res.warning;
    v.lambda_dev = std::abs(e.end.lambda[n - 1] - p0.lambda[n - 1]);
    if (o.pairs && !s.boundary) {
      detail::CutEnd r = detail::cut_end(M, reflect(M, eta), o.cut);
      v.pair_gap = vec::dist(e.pos, r.pos);
      v.pair_dt = std::abs(e.t0 - r.t0);
      if (!r.res.warning.empty()) v.warning = detail::append_warning(v.warning, "reflected: " + r.res.warning);
    }
    if (o.measure_conjugacy) {
      try {
        v.conj_mult = detail::torus_kernel_dim(M, eta, v.t0, o.conj_tol);
      } catch (const std::exception& ex) {
        v.conj_mult = -1;
        v.warning = detail::append_warning(v.warning, std::string("conjugacy not measured: ") + ex.what());
      }
    }
    v.ok = true;
  } catch (const std::exception& ex) {
    v.ok = false;
    v.error = ex.what();
  }
  return v;
}

inline void fill_header(CutLocusMesh& m, const LiouvilleManifold& M) {
  m.n = M.n();
  m.spectrum = M.spectrum().values();
  m.generator = M.A().kind_name();
}

// Cut locus of a base point outside J_{n-1}: the image of the closed hemisphere
// {xi_n >= 0} under eta -> gamma(t0(eta), eta).
inline CutLocusMesh build_cut_locus(const LiouvilleManifold& M, const BandPoint& p0_in, int n_rad,
                                    int n_ang, const CutLocusOptions& o = {}) {
  const int n = M.n();
  if (p0_in.n() != n) throw InputError("base point has wrong dimension");
  if (classify_point(M, p0_in).J(n - 1))
    throw InputError("base point lies in J_{n-1}: use build_cut_locus_degenerate");
  BandPoint p0 = o.normalize ? normalize_fundamental(M, p0_in) : p0_in;
  HemisphereGrid G = hemisphere_grid(n, n_rad, n_ang);
  CutLocusMesh m;
  fill_header(m, M);
  m.n_rad = G.n_rad;
  m.n_ang = G.n_ang;
  m.p0_x = p0.x;
  m.p0_lambda = p0.lambda;
  m.p0_u = embed_point(M, p0);
  m.vertices.resize(G.samples.size());
  parallel_for(int(G.samples.size()), o.workers,
               [&](int i) { m.vertices[i] = cut_vertex(M, p0, G.samples[i], o); });
  m.cells = G.cells;
  m.boundary_loop = G.boundary_loop;
  return m;
}

// ---------------------------------------------------------------------------
// Base point in J_{n-1} (ellipsoid, n = 3).

// Orthonormal frame at u0 in J_{n-1}: unit normal nu of the ellipsoid, e_perp = axis
// n-1 (normal to N_{n-1}), e_normal (in N_{n-1}, normal to J_{n-1}), and a basis of
// the tangent space of J_{n-1}.
struct JFrame {
  std::vector<double> u0, nu, e_perp, e_normal;
  std::vector<std::vector<double>> tangent;
};

inline JFrame j_frame(const AxisSpectrum& a, const std::vector<double>& u0) {
  const int n = a.n(), m = n + 1;
  JFrame F;
  F.u0 = u0;
  F.nu.assign(m, 0.0);
  for (int i = 0; i < m; ++i) F.nu[i] = u0[i] / a[i];
  vec::normalize(F.nu);
  F.e_perp.assign(m, 0.0);
  F.e_perp[n - 1] = 1.0;
  F.e_normal.assign(m, 0.0);
  for (int i = 0; i < m; ++i)
    if (i != n - 1) F.e_normal[i] = u0[i] / (a[i] - a[n - 1]);
  vec::axpy(F.e_normal, -vec::dot(F.e_normal, F.nu), F.nu);
  vec::normalize(F.e_normal);
  std::vector<std::vector<double>> basis{F.nu, F.e_perp, F.e_normal};
  for (int k = 0; k < m && int(F.tangent.size()) < n - 2; ++k) {
    std::vector<double> w(m, 0.0);
    w[k] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) vec::axpy(w, -vec::dot(w, b), b);
      for (const auto& b : F.tangent) vec::axpy(w, -vec::dot(w, b), b);
    }
    if (vec::norm(w) < 1e-6) continue;
    vec::normalize(w);
    F.tangent.push_back(w);
  }
  return F;
}

// Unit vector c e_J + sqrt(1 - c^2)(cos psi e_normal + sin psi e_perp), n = 3.
inline std::vector<double> j_direction(const JFrame& F, double c, double psi) {
  std::vector<double> v(F.u0.size(), 0.0);
  double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  vec::axpy(v, c, F.tangent.at(0));
  vec::axpy(v, s * std::cos(psi), F.e_normal);
  vec::axpy(v, s * std::sin(psi), F.e_perp);
  return v;
}

// Dimension of the kernel of the ambient Jacobi map at t (fields with J(0) = 0,
// J'(0) normal to v0), relative to the size at t / 2.
inline int ambient_kernel_dim(const AxisSpectrum& a, const std::vector<double>& u0,
                              const std::vector<double>& v0, double t, double tol,
                              const AmbientOptions& opt = {}) {
  const int m = a.n() + 1;
  std::vector<double> nu(m);
  for (int i = 0; i < m; ++i) nu[i] = u0[i] / a[i];
  vec::normalize(nu);
  std::vector<double> vn = v0;
  vec::normalize(vn);
  std::vector<std::vector<double>> cols;
  std::vector<std::vector<double>> basis{nu, vn};
  for (int k = 0; k < m && int(cols.size()) < m - 2; ++k) {
    std::vector<double> w(m, 0.0);
    w[k] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) vec::axpy(w, -vec::dot(w, b), b);
    if (vec::norm(w) < 1e-6) continue;
    vec::normalize(w);
    basis.push_back(w);
    std::vector<double> c(2 * m, 0.0);
    std::copy(w.begin(), w.end(), c.begin() + m);
    cols.push_back(c);
  }
  AmbientTrace tr = integrate_ambient(a, u0, v0, t, opt, {}, cols);
  auto svals = [&](double s) {
    std::vector<double> z = tr.state(s);
    std::vector<double> u(z.begin(), z.begin() + m), v(z.begin() + m, z.begin() + 2 * m), nn(m);
    for (int i = 0; i < m; ++i) nn[i] = u[i] / a[i];
    vec::normalize(nn);
    vec::normalize(v);
    Eigen::MatrixXd W(m, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::vector<double> du(z.begin() + 2 * m * (c + 1), z.begin() + 2 * m * (c + 1) + m);
      vec::axpy(du, -vec::dot(du, nn), nn);
      vec::axpy(du, -vec::dot(du, v), v);
      for (int i = 0; i < m; ++i) W(i, c) = du[i];
    }
    return Eigen::JacobiSVD<Eigen::MatrixXd>(W).singularValues().eval();
  };
  Eigen::VectorXd ref = svals(0.5 * t), sv = svals(t);
  int k = 0;
  for (int j = 0; j < sv.size(); ++j)
    if (sv(j) <= tol * ref(0)) ++k;
  return k;
}

struct DegenerateOptions {
  CutLocusOptions base;
  double psi = 0.7;   // generic angle of the normal part
  int n_psi = 8;      // S^1 sweep per interior vertex
  double t_max = 200;
};

// Cut locus of p0 in J_{n-1} (n = 3, A = sqrt): samples c in [-1, 1] of the
// tangential component; c = +-1 are the directions along J_{n-1}.
inline CutLocusMesh build_cut_locus_degenerate(const LiouvilleManifold& M,
                                               const std::vector<double>& u0, int n_rad,
                                               const DegenerateOptions& o = {}) {
  const int n = M.n();
  if (!M.is_ellipsoid()) throw InputError("degenerate cut locus needs A = sqrt");
  if (n != 3) throw InputError("degenerate cut-locus meshes are implemented for n = 3");
  if (int(u0.size()) != n + 1) throw InputError("ambient base point has wrong dimension");
  std::vector<double> lam = elliptic_coords(M.spectrum(), u0, 1e-8);
  double tol = 1e-6 * M.spectrum().width();
  if (std::abs(lam[n - 2] - M.a(n - 1)) > tol || std::abs(lam[n - 1] - M.a(n - 1)) > tol)
    throw InputError("base point is not on J_{n-1}");
  if (n_rad < 1) throw InputError("degenerate grid needs n_rad >= 1");
  const AxisSpectrum& a = M.spectrum();
  JFrame F = j_frame(a, u0);
  CutLocusMesh m;
  fill_header(m, M);
  m.degenerate = true;
  m.n_rad = n_rad;
  m.n_ang = 1;
  m.p0_u = u0;
  m.p0_lambda = lam;
  const int K = 2 * n_rad;
  m.vertices.resize(K + 1);
  AmbientOptions aopt;
  parallel_for(K + 1, o.base.workers, [&](int k) {
    CutVertex v;
    v.ring = k;
    v.boundary = (k == 0 || k == K);
    double c = v.boundary ? (k == 0 ? -1.0 : 1.0) : -1.0 + double(k) / n_rad;
    v.q = {c};
    // interior cut points are reached by a circle of minimal geodesics
    v.tag = v.boundary ? "first-conjugate" : "circle-family";
    try {
      v.v0 = j_direction(F, c, o.psi);
      JBaseCut r = cut_time_from_J(a, u0, v.v0, o.t_max, aopt);
      v.t0 = r.t0;
      v.u = r.u;
      v.cut_case = r.tangent ? "in-N_{n-1}" : "from-J";
      BandPoint e = torus_from_ambient(M, r.u);
      v.x = e.x;
      v.lambda = e.lambda;
      v.lambda_dev = std::max(std::abs(e.lambda[n - 2] - M.a(n - 1)), std::abs(e.lambda[n - 1] - M.a(n - 1)));
      if (!v.boundary) {
        for (int j = 1; j < o.n_psi; ++j) {
          double psi = o.psi + 2.0 * std::numbers::pi * j / o.n_psi;
          JBaseCut rj = cut_time_from_J(a, u0, j_direction(F, c, psi), o.t_max, aopt);
          v.s1_spread = std::max(v.s1_spread, vec::dist(rj.u, r.u));
        }
      }
      if (o.base.measure_conjugacy)
        v.conj_mult = ambient_kernel_dim(a, u0, v.v0, v.t0, o.base.conj_tol, aopt);
      v.ok = true;
    } catch (const std::exception& ex) {
      v.ok = false;
      v.error = ex.what();
    }
    m.vertices[k] = v;
  });
  for (int k = 1; k <= K; ++k) m.cells.push_back({k - 1, k});
  m.boundary_loop = {0, K};
  return m;
}

// The same cut locus computed inside N_{n-1} as the Liouville manifold of
// a without a_{n-1}, lifted back with u_{n-1} = 0.
inline CutLocusMesh intrinsic_cut_locus_J(const LiouvilleManifold& M, const std::vector<double>& u0,
                                          int n_rad, int n_ang, CutLocusOptions o = {}) {
  const int n = M.n();
  if (!M.is_ellipsoid()) throw InputError("intrinsic comparison needs A = sqrt");
  LiouvilleManifold Mt(M.spectrum().without(n - 1), M.A(), M.tol());
  std::vector<double> ut;
  for (int i = 0; i <= n; ++i)
    if (i != n - 1) ut.push_back(u0[i]);
  // renormalize onto the lower-dimensional ellipsoid
  double s = std::sqrt(ellipsoid_constraint(Mt.spectrum(), ut));
  for (double& q : ut) q /= s;
  BandPoint pt = torus_from_ambient(Mt, ut);
  o.normalize = false;  // keep the sheet, so positions lift back unchanged
  o.measure_conjugacy = false;
  CutLocusMesh m = build_cut_locus(Mt, pt, n_rad, n_ang, o);
  for (auto& v : m.vertices)
    if (v.ok) v.u.insert(v.u.begin() + (n - 1), 0.0);
  if (!m.p0_u.empty()) m.p0_u.insert(m.p0_u.begin() + (n - 1), 0.0);
  return m;
}

// ---------------------------------------------------------------------------
// Polylines and Hausdorff distance.

inline std::vector<std::vector<double>> ordered_positions(const CutLocusMesh& m) {
  std::vector<std::vector<double>> pts;
  for (const auto& v : m.vertices)
    if (v.ok && !v.u.empty()) pts.push_back(v.u);
  return pts;
}

inline double point_polyline(const std::vector<double>& p, const std::vector<std::vector<double>>& P) {
  double d = std::numeric_limits<double>::infinity();
  if (P.size() == 1) return vec::dist(p, P[0]);
  for (std::size_t k = 0; k + 1 < P.size(); ++k) d = std::min(d, vec::point_segment(p, P[k], P[k + 1]));
  return d;
}

inline double hausdorff_polyline(const std::vector<std::vector<double>>& A,
                                  const std::vector<std::vector<double>>& B) {
  if (A.empty() || B.empty()) return std::numeric_limits<double>::infinity();
  double h = 0;
  for (const auto& p : A) h = std::max(h, point_polyline(p, B));
  for (const auto& p : B) h = std::max(h, point_polyline(p, A));
  return h;
}

// ---------------------------------------------------------------------------
// Audits.

struct PairReport {
  int pairs = 0;
  double max_gap = 0;       // interior pairs
  double max_dt = 0;
  double boundary_gap = 0;  // eta = eta' on the boundary
};

inline PairReport pair_coincidence_audit(const CutLocusMesh& m) {
  PairReport r;
  for (const auto& v : m.vertices) {
    if (!v.ok) continue;
    if (v.boundary) {
      r.boundary_gap = std::max(r.boundary_gap, v.pair_gap);
      continue;
    }
    ++r.pairs;
    r.max_gap = std::max(r.max_gap, v.pair_gap);
    r.max_dt = std::max(r.max_dt, v.pair_dt);
  }
  return r;
}

struct StructureReport {
  int vertices = 0, holes = 0;
  double max_lambda_dev = 0;
  int injectivity_violations = 0;
  double boundary_separation = 0;  // min distance of non-adjacent boundary edges / mean edge
  bool boundary_simple = true;
  int components = 0;
  bool connected = false;
  double diameter = 0;
  double max_edge = 0;
};

inline StructureReport mesh_structure(const CutLocusMesh& m) {
  StructureReport r;
  const int N = int(m.vertices.size());
  r.vertices = N;
  r.holes = m.holes();
  for (const auto& v : m.vertices)
    if (v.ok) r.max_lambda_dev = std::max(r.max_lambda_dev, v.lambda_dev);
  // neighbors from cells
  std::vector<std::vector<int>> nb(N);
  for (const auto& c : m.cells)
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        if (i != j) nb[c[i]].push_back(c[j]);
  for (auto& l : nb) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  auto ok = [&](int i) { return m.vertices[i].ok && !m.vertices[i].u.empty(); };
  for (int i = 0; i < N; ++i) {
    if (!ok(i)) continue;
    for (int j : nb[i])
      if (ok(j)) r.max_edge = std::max(r.max_edge, vec::dist(m.pos(i), m.pos(j)));
    for (int j = i + 1; j < N; ++j)
      if (ok(j)) r.diameter = std::max(r.diameter, vec::dist(m.pos(i), m.pos(j)));
  }
  // injectivity surrogate on interior vertices
  for (int i = 0; i < N; ++i) {
    if (!ok(i) || m.vertices[i].boundary) continue;
    double h = std::numeric_limits<double>::infinity();
    for (int j : nb[i])
      if (ok(j)) h = std::min(h, vec::dist(m.pos(i), m.pos(j)));
    if (!std::isfinite(h)) continue;
    for (int j = 0; j < N; ++j) {
      if (j == i || !ok(j) || m.vertices[j].boundary) continue;
      if (std::binary_search(nb[i].begin(), nb[i].end(), j)) continue;
      if (vec::dist(m.pos(i), m.pos(j)) < 0.1 * h) ++r.injectivity_violations;
    }
  }
  // boundary polygon: closed loop for n = 3, the whole arc for n = 2
  std::vector<std::vector<double>> loop;
  bool closed = m.boundary_loop.size() > 2;
  if (closed) {
    for (int i : m.boundary_loop)
      if (ok(i)) loop.push_back(m.pos(i));
  } else {
    for (int i = 0; i < N; ++i)
      if (ok(i)) loop.push_back(m.pos(i));
  }
  const int L = int(loop.size());
  const int E = closed ? L : L - 1;
  double mean = 0;
  for (int e = 0; e < E; ++e) mean += vec::dist(loop[e], loop[(e + 1) % L]);
  mean = E > 0 ? mean / E : 0;
  double sep = std::numeric_limits<double>::infinity();
  for (int e = 0; e < E; ++e)
    for (int f = e + 2; f < E; ++f) {
      if (closed && e == 0 && f == E - 1) continue;
      sep = std::min(sep, vec::segment_segment(loop[e], loop[(e + 1) % L], loop[f], loop[(f + 1) % L]));
    }
  r.boundary_separation = (mean > 0 && std::isfinite(sep)) ? sep / mean : 0;
  r.boundary_simple = !std::isfinite(sep) || sep > 1e-3 * mean;
  // connectivity of the valid vertices through cells
  std::vector<int> parent(N);
  for (int i = 0; i < N; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  for (const auto& c : m.cells)
    for (std::size_t i = 1; i < c.size(); ++i)
      if (ok(c[0]) && ok(c[i])) parent[find(c[0])] = find(c[i]);
  for (int i = 0; i < N; ++i)
    if (ok(i) && find(i) == i) ++r.components;
  r.connected = r.components == 1;
  return r;
}

struct AntipodalReport {
  bool applicable = false;
  double distance = 0;           // from -u(p0) to the mesh
  double boundary_distance = 0;  // from -u(p0) to the boundary (n = 3) or arc ends (n = 2)
  double margin = 0;             // n = 2: arc-parameter margin as a fraction of the arc length
  double resolution = 0;         // largest mesh edge
  bool pass = false;
};

inline AntipodalReport antipodal_audit(const CutLocusMesh& m) {
  AntipodalReport r;
  if (m.generator != "sqrt" || m.p0_u.empty() || m.holes() > 0) return r;
  r.applicable = true;
  std::vector<double> q = m.p0_u;
  for (double& v : q) v = -v;
  if (m.n == 2) {
    std::vector<std::vector<double>> P = ordered_positions(m);
    std::vector<double> cum{0.0};
    for (std::size_t k = 0; k + 1 < P.size(); ++k) {
      double l = vec::dist(P[k], P[k + 1]);
      cum.push_back(cum.back() + l);
      r.resolution = std::max(r.resolution, l);
    }
    const double Ltot = cum.back();
    r.distance = std::numeric_limits<double>::infinity();
    double s_best = 0;
    for (std::size_t k = 0; k + 1 < P.size(); ++k) {
      double s;
      double d = vec::point_segment(q, P[k], P[k + 1], &s);
      if (d < r.distance) {
        r.distance = d;
        s_best = cum[k] + s * (cum[k + 1] - cum[k]);
      }
    }
    r.margin = Ltot > 0 ? std::min(s_best, Ltot - s_best) / Ltot : 0;
    r.boundary_distance = std::min(vec::dist(q, P.front()), vec::dist(q, P.back()));
    r.pass = r.distance <= 0.5 * r.resolution && r.margin > 0.01;
    return r;
  }
  r.distance = std::numeric_limits<double>::infinity();
  for (const auto& c : m.cells) {
    r.distance = std::min(r.distance, vec::point_triangle(q, m.pos(c[0]), m.pos(c[1]), m.pos(c[2])));
    for (int e = 0; e < 3; ++e)
      r.resolution = std::max(r.resolution, vec::dist(m.pos(c[e]), m.pos(c[(e + 1) % 3])));
  }
  r.boundary_distance = std::numeric_limits<double>::infinity();
  const auto& B = m.boundary_loop;
  for (std::size_t k = 0; k < B.size(); ++k)
    r.boundary_distance = std::min(r.boundary_distance, vec::point_segment(q, m.pos(B[k]), m.pos(B[(k + 1) % B.size()])));
  double diam = 0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < m.vertices.size(); ++j) diam = std::max(diam, vec::dist(m.pos(i), m.pos(j)));
  r.margin = diam > 0 ? r.boundary_distance / diam : 0;
  r.pass = r.distance <= 0.5 * r.resolution && r.boundary_distance > r.distance && r.margin > 0.01;
  return r;
}

// First conjugate point along boundary samples; no conjugate point before t0
// along interior samples.
struct ConjugacyEntry {
  int vertex = 0;
  bool boundary = false;
  double t0 = 0;
  double t_first = -1;     // first conjugate event, -1 if none in range
  int multiplicity = 0;
  double min_ratio = 0;    // interior: min transversal singular value on (0, t0) over the max
  bool pass = false;
  std::string note;
};

struct ConjugacyAudit {
  std::vector<ConjugacyEntry> entries;
  int checked = 0, failed = 0, skipped = 0;
  double max_dt = 0;            // boundary |t_first - t0|
  double min_interior_ratio = std::numeric_limits<double>::infinity();
  bool pass = false;
};

struct ConjugacyAuditOptions {
  ConjugateOptions scan;
  bool interior = true;
  int interior_samples = 50;
  double time_tol = 1e-6;
  double min_ratio = 1e-6;
  int workers = 1;
};

inline ConjugacyEntry conjugacy_entry(const LiouvilleManifold& M, const BandPoint& p0,
                                      const CutVertex& v, int index, const ConjugacyAuditOptions& o) {
  const int n = M.n();
  ConjugacyEntry e;
  e.vertex = index;
  e.boundary = v.boundary;
  e.t0 = v.t0;
  CovectorState eta{p0, v.xi};
  if (v.boundary) {
    ConjugateScan s = conjugate_points(M, eta, v.t0 + std::max(0.05 * v.t0, 0.05), o.scan);
    if (!s.events.empty()) {
      e.t_first = s.events.front().t;
      e.multiplicity = s.events.front().multiplicity;
    }
    e.pass = e.t_first >= 0 && std::abs(e.t_first - v.t0) <= o.time_tol && e.multiplicity == 1;
    if (e.multiplicity >= 2) e.note = "multiplicity 2: near a J_{n-1} configuration";
    if (e.t_first < 0) e.note = "no conjugate event found";
    return e;
  }
  ConjugateScan s = conjugate_points(M, eta, v.t0, o.scan);
  for (const auto& ev : s.events)
    if (ev.t < v.t0 - o.time_tol) {
      e.t_first = ev.t;
      e.multiplicity = ev.multiplicity;
      break;
    }
  // smallest singular value over the samples, relative to the largest one seen
  double smin = std::numeric_limits<double>::infinity(), smax = 0;
  for (int j = 1; j <= o.interior_samples; ++j) {
    double t = v.t0 * j / (o.interior_samples + 1);
    TransversalBlock b = transversal_block(M, s.frame.trace.state(t), n - 1);
    smin = std::min(smin, b.sv(n - 2));
    smax = std::max(smax, b.sv(0));
  }
  e.min_ratio = smax > 0 ? smin / smax : 0;
  e.pass = e.t_first < 0 && e.min_ratio > o.min_ratio;
  if (e.t_first >= 0) e.note = "conjugate event before t0";
  return e;
}

inline ConjugacyAudit boundary_conjugacy_audit(const LiouvilleManifold& M, const CutLocusMesh& m,
                                               const ConjugacyAuditOptions& o = {}) {
  ConjugacyAudit a;
  if (m.degenerate) throw InputError("conjugacy audit runs on generic-base meshes");
  BandPoint p0 = make_point(M, m.p0_x);
  std::vector<int> idx;
  for (int i = 0; i < int(m.vertices.size()); ++i) {
    const CutVertex& v = m.vertices[i];
    if (!v.ok || v.xi.empty()) {
      ++a.skipped;
      continue;
    }
    if (v.boundary || o.interior) idx.push_back(i);
  }
  std::vector<ConjugacyEntry> out(idx.size());
  std::vector<char> fail(idx.size(), 0);
  std::vector<std::string> why(idx.size());
  parallel_for(int(idx.size()), o.workers, [&](int k) {
    try {
      out[k] = conjugacy_entry(M, p0, m.vertices[idx[k]], idx[k], o);
    } catch (const std::exception& ex) {
      fail[k] = 1;
      why[k] = ex.what();
    }
  });
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (fail[k]) {
      ++a.skipped;
      ConjugacyEntry e;
      e.vertex = idx[k];
      e.boundary = m.vertices[idx[k]].boundary;
      e.note = "skipped: " + why[k];
      a.entries.push_back(e);
      continue;
    }
    const ConjugacyEntry& e = out[k];
    ++a.checked;
    if (!e.pass) ++a.failed;
    if (e.boundary && e.t_first >= 0) a.max_dt = std::max(a.max_dt, std::abs(e.t_first - e.t0));
    if (!e.boundary) a.min_interior_ratio = std::min(a.min_interior_ratio, e.min_ratio);
    a.entries.push_back(e);
  }
  a.pass = a.checked > 0 && a.failed == 0;
  return a;
}

// ---------------------------------------------------------------------------
// Brute-force shooting.

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct MinimalityReport {
  Verdict verdict = Verdict::Inconclusive;
  double t_claimed = 0;
  double min_arrival = std::numeric_limits<double>::infinity();
  int rays = 0, rays_hit = 0, rays_failed = 0;
  double r_hit = 0, tol = 0;
};

struct MinimalityOptions {
  int resolution = 2000;
  double r_hit = 1e-3;
  double margin = 0.05;       // integrate to t_claimed (1 + margin)
  double rtol = 1e-10, atol = 1e-12;
  int workers = 1;
  std::uint64_t seed = 1;     // direction sampling for n > 3
};

// Unit directions on S^{n-1}: a uniform circle for n = 2, a Fibonacci lattice for n = 3,
// seeded Gaussian samples otherwise.
inline std::vector<std::vector<double>> shooting_directions(int n, int count, std::uint64_t seed) {
  std::vector<std::vector<double>> d;
  const double pi = std::numbers::pi;
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      double th = 2.0 * pi * (k + 0.5) / count;
      d.push_back({std::cos(th), std::sin(th)});
    }
  } else if (n == 3) {
    const double ga = pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      double z = 1.0 - 2.0 * (k + 0.5) / count, r = std::sqrt(1.0 - z * z);
      d.push_back({r * std::cos(ga * k), r * std::sin(ga * k), z});
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01;
    for (int k = 0; k < count; ++k) {
      std::vector<double> v(n);
      for (double& x : v) x = N01(rng);
      vec::normalize(v);
      d.push_back(v);
    }
  }
  return d;
}

namespace detail {

// First time in [s.t0, s.t1] at which |pos(t) - q| < r, or -1. pos is evaluated through
// the dense step; speed <= vmax bounds the skip test.
template <class Pos>
double first_entry(const DenseStep& s, const Pos& pos, const std::vector<double>& q, double r,
                   double vmax) {
  double da = vec::dist(pos(s, s.t0), q), db = vec::dist(pos(s, s.t1()), q);
  if (std::min(da, db) - vmax * s.h > r) return -1;
  int K = std::max(8, int(std::ceil(s.h * vmax / (0.25 * r))));
  K = std::min(K, 20000);
  double tp = s.t0, dp = da;
  if (dp < r) return tp;
  for (int j = 1; j <= K; ++j) {
    double t = s.t0 + s.h * j / K;
    double d = vec::dist(pos(s, t), q);
    if (d < r) {
      double lo = tp, hi = t;
      for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        if (vec::dist(pos(s, mid), q) < r)
          hi = mid;
        else
          lo = mid;
      }
      return hi;
    }
    tp = t;
    dp = d;
  }
  return -1;
}

}  // namespace detail

// q is a position in the same space as embed_point. Rays run on the ambient
// ellipsoid engine when A = sqrt (independent of the torus machinery), otherwise
// on the torus flow with the embed_point positions.
inline MinimalityReport minimality_audit(const LiouvilleManifold& M, const BandPoint& p0,
                                         const std::vector<double>& q, double t_claimed,
                                         const MinimalityOptions& o = {}) {
  const int n = M.n(), m = n + 1;
  MinimalityReport rep;
  rep.t_claimed = t_claimed;
  rep.r_hit = o.r_hit;
  rep.tol = 2.0 * o.r_hit;
  const double T = t_claimed * (1.0 + o.margin);
  std::vector<std::vector<double>> dirs = shooting_directions(n, o.resolution, o.seed);
  rep.rays = int(dirs.size());
  std::vector<double> arrival(dirs.size(), -1.0);
  std::vector<char> failed(dirs.size(), 0);
  std::vector<double> u0 = embed_point(M, p0);
  // orthonormal tangent basis at u0 for the ambient engine
  std::vector<std::vector<double>> tb;
  if (M.is_ellipsoid()) {
    std::vector<double> nu(m);
    for (int i = 0; i < m; ++i) nu[i] = u0[i] / M.a(i);
    vec::normalize(nu);
    std::vector<std::vector<double>> basis{nu};
    for (int k = 0; k < m && int(tb.size()) < n; ++k) {
      std::vector<double> w(m, 0.0);
      w[k] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) vec::axpy(w, -vec::dot(w, b), b);
      if (vec::norm(w) < 1e-6) continue;
      vec::normalize(w);
      basis.push_back(w);
      tb.push_back(w);
    }
  }
  parallel_for(int(dirs.size()), o.workers, [&](int k) {
    try {
      double hit = -1;
      if (M.is_ellipsoid()) {
        std::vector<double> v(m, 0.0);
        for (int j = 0; j < n; ++j) vec::axpy(v, dirs[k][j], tb[j]);
        AmbientOptions ao;
        ao.rtol = o.rtol;
        ao.atol = o.atol;
        auto pos = [m](const DenseStep& s, double t) {
          std::vector<double> z = s.eval(t);
          return std::vector<double>(z.begin(), z.begin() + m);
        };
        integrate_ambient(M.spectrum(), u0, v, T, ao, [&](const AmbientTrace& tr) {
          hit = detail::first_entry(tr.steps.back(), pos, q, o.r_hit, 1.0);
          return hit >= 0;
        });
      } else {
        CovectorState eta = covector_at(M, p0, dirs[k]);
        TraceOptions to;
        to.rtol = o.rtol;
        to.atol = o.atol;
        to.monitor_b = false;
        auto pos = [&](const DenseStep& s, double t) {
          std::vector<double> z = s.eval(t);
          std::vector<double> x(z.begin(), z.begin() + n);
          return embed_point(M, make_point(M, x));
        };
        // the embedding is not unit speed: estimate a bound per step
        integrate_geodesic(M, eta, T, to, [&](const GeodesicTrace& tr) {
          const DenseStep& s = tr.steps.back();
          double vmax = 0;
          std::vector<double> prev = pos(s, s.t0);
          for (int j = 1; j <= 8; ++j) {
            std::vector<double> cur = pos(s, s.t0 + s.h * j / 8);
            vmax = std::max(vmax, vec::dist(prev, cur) * 8 / s.h);
            prev = cur;
          }
          hit = detail::first_entry(s, pos, q, o.r_hit, 2.0 * vmax + 1e-12);
          return hit >= 0;
        });
      }
      arrival[k] = hit;
    } catch (const std::exception&) {
      failed[k] = 1;
    }
  });
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (failed[k]) {
      ++rep.rays_failed;
      continue;
    }
    if (arrival[k] >= 0) {
      ++rep.rays_hit;
      rep.min_arrival = std::min(rep.min_arrival, arrival[k]);
    }
  }
  if (rep.rays_hit == 0)
    rep.verdict = Verdict::Inconclusive;
  else
    rep.verdict = rep.min_arrival >= t_claimed - rep.tol ? Verdict::Pass : Verdict::Fail;
  return rep;
}

}  // namespace liouville

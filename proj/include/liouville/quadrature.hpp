#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gauss.hpp"
#include "generator.hpp"
#include "polynomial.hpp"
#include "spectrum.hpp"

namespace liouville {

// The constants a_0..a_n together with roots b_1..b_{n-1} (b[l-1] = b_l).
// Band i is [a_i^+, a_{i-1}^-] with a_i^+ = max(a_i, b_i), a_i^- = min(a_i, b_i).
struct BandConfig {
  std::vector<double> a;
  std::vector<double> b;

  int n() const { return int(a.size()) - 1; }
  double bl(int l) const { return b[l - 1]; }
  double plus(int i) const { return (i >= 1 && i <= n() - 1) ? std::max(a[i], b[i - 1]) : a[i]; }
  double minus(int i) const { return (i >= 1 && i <= n() - 1) ? std::min(a[i], b[i - 1]) : a[i]; }
  double lo(int i) const { return plus(i); }
  double hi(int i) const { return minus(i - 1); }
  double width() const { return a.front() - a.back(); }

  // a_{l+1} <= b_l <= a_{l-1} and b_1 >= ... >= b_{n-1}.
  bool admissible(double tol = 0) const {
    if (int(b.size()) != n() - 1) return false;
    for (int l = 1; l <= n() - 1; ++l) {
      if (b[l - 1] < a[l + 1] - tol || b[l - 1] > a[l - 1] + tol) return false;
      if (l >= 2 && b[l - 1] > b[l - 2] + tol) return false;
    }
    return true;
  }

  static BandConfig make(const AxisSpectrum& s, std::vector<double> b) {
    BandConfig c{s.values(), std::move(b)};
    if (!c.admissible(1e-12 * c.width())) throw InputError("roots b do not interlace the spectrum");
    return c;
  }
};

struct QuadResult {
  double value = 0;
  double magnitude = 0;  // integral of |integrand|
  int nodes = 0;
  bool converged = true;
};

// Numerator G(lambda) * W(lambda) over sqrt(-prod(lambda - b_k) prod(lambda - a_k)) on band i.
struct PeriodIntegrand {
  Polynomial G{{1.0}};
  std::function<double(double)> W;  // empty means 1
  BandConfig cfg;
  int i = 1;
};

namespace detail {

// Band integrand after the substitution lambda = lo + 2h sin^2(theta/2):
//   integral = sign (2h)^{(p2+q2)/2} int S(lambda) sin^{p2}(theta/2) cos^{q2}(theta/2) dtheta
// with S = Gt W / sqrt(prod over remaining roots |lambda - r|).
struct BandModel {
  double lo = 0, hi = 0, h = 0;
  int p2 = 1, q2 = 1;
  double sign = 1;
  Polynomial Gt;
  std::vector<double> rest;
  const std::function<double(double)>* W = nullptr;

  double S(double lam) const {
    double q = 1;
    for (double r : rest) q *= std::abs(lam - r);
    double w = (W && *W) ? (*W)(lam) : 1.0;
    return Gt(lam) * w / std::sqrt(q);
  }
  double prefactor() const { return sign * std::pow(2.0 * h, 0.5 * (p2 + q2)); }
  double kernel(double th) const {
    double s = std::sin(0.5 * th), c = std::cos(0.5 * th);
    double lam = lo + 2.0 * h * s * s;
    return S(lam) * std::pow(s, p2) * std::pow(c, q2);
  }
  // Exponents (p2, q2) even => kernel is even and 2pi-periodic in theta.
  bool periodic() const { return p2 % 2 == 0 && q2 % 2 == 0; }
};

inline bool vanishes_at(const Polynomial& G, double x) {
  double scale = 0, xp = 1;
  for (int k = 0; k <= G.degree(); ++k) {
    scale += std::abs(G.coeff(k)) * xp;
    xp *= std::abs(x);
  }
  return std::abs(G(x)) <= 1e-12 * scale;
}

inline BandModel band_model(const PeriodIntegrand& pi, double coincide_tol) {
  const BandConfig& c = pi.cfg;
  const int n = c.n(), i = pi.i;
  if (i < 1 || i > n) throw InputError("band index out of range");
  // roots tagged by id: 0..n are a_k, n+1.. are b_l
  struct Root {
    double v;
    bool used;
  };
  std::vector<Root> roots;
  for (int k = 0; k <= n; ++k) roots.push_back({c.a[k], false});
  for (int l = 1; l <= n - 1; ++l) roots.push_back({c.b[l - 1], false});
  int lo_id = (i <= n - 1 && c.b[i - 1] >= c.a[i]) ? n + i : i;
  int hi_id = (i >= 2 && c.b[i - 2] <= c.a[i - 1]) ? n + i - 1 : i - 1;
  BandModel m;
  m.lo = roots[lo_id].v;
  m.hi = roots[hi_id].v;
  if (m.hi < m.lo - coincide_tol) {
    std::ostringstream os;
    os << "band " << i << " is empty: [" << m.lo << ", " << m.hi << "]";
    throw InputError(os.str());
  }
  if (m.hi < m.lo) m.hi = m.lo;
  m.h = 0.5 * (m.hi - m.lo);
  roots[lo_id].used = roots[hi_id].used = true;
  int mlo = 1, mhi = 1;
  for (auto& r : roots) {
    if (r.used) continue;
    if (std::abs(r.v - m.lo) <= coincide_tol) {
      r.used = true;
      ++mlo;
    } else if (std::abs(r.v - m.hi) <= coincide_tol) {
      r.used = true;
      ++mhi;
    } else if (r.v > m.lo && r.v < m.hi) {
      std::ostringstream os;
      os << "radicand has an interior zero at " << r.v << " in band " << i;
      throw InputError(os.str());
    }
  }
  for (auto& r : roots)
    if (!r.used) m.rest.push_back(r.v);
  Polynomial G = pi.G;
  int klo = 0, khi = 0;
  while (klo < mlo && G.degree() >= 1 && vanishes_at(G, m.lo)) {
    G = G.deflate(m.lo);
    ++klo;
  }
  while (khi < mhi && G.degree() >= 1 && vanishes_at(G, m.hi)) {
    G = G.deflate(m.hi);
    ++khi;
  }
  m.p2 = 2 * klo - mlo + 1;
  m.q2 = 2 * khi - mhi + 1;
  if (m.p2 < 0 || m.q2 < 0) {
    std::ostringstream os;
    os << "integrand not integrable on band " << i << ": endpoint root multiplicities (" << mlo
       << ", " << mhi << ") not cancelled by the numerator";
    throw InputError(os.str());
  }
  m.sign = (khi % 2 == 0) ? 1.0 : -1.0;
  m.Gt = G;
  m.W = &pi.W;
  return m;
}

// int_{t0}^{t1} kernel by Gauss-Legendre with doubling (or the midpoint rule on
// [0, pi] for periodic kernels).
inline QuadResult theta_integral(const BandModel& m, double t0, double t1, double rtol,
                                 int max_nodes) {
  QuadResult r;
  if (t1 == t0) return r;
  const bool full = (t0 == 0.0 && t1 == std::numbers::pi && m.periodic());
  double prev = 0;
  bool have_prev = false;
  for (int N = 16; N <= max_nodes; N *= 2) {
    double s = 0, sa = 0;
    if (full) {
      for (int k = 0; k < N; ++k) {
        double v = m.kernel(std::numbers::pi * (k + 0.5) / N);
        s += v;
        sa += std::abs(v);
      }
      s *= std::numbers::pi / N;
      sa *= std::numbers::pi / N;
    } else {
      const GaussRule& g = gauss_legendre(std::min(N, 4096));
      // beyond 4096 nodes split into panels
      int panels = std::max(1, N / 4096);
      double w = (t1 - t0) / panels;
      for (int p = 0; p < panels; ++p) {
        double a = t0 + p * w, mid = a + 0.5 * w, hw = 0.5 * w;
        for (std::size_t k = 0; k < g.x.size(); ++k) {
          double v = m.kernel(mid + hw * g.x[k]);
          s += g.w[k] * hw * v;
          sa += g.w[k] * hw * std::abs(v);
        }
      }
    }
    r.value = s;
    r.magnitude = sa;
    r.nodes = N;
    if (have_prev && std::abs(s - prev) <= rtol * sa + 1e-300) {
      r.converged = true;
      break;
    }
    r.converged = false;
    prev = s;
    have_prev = true;
  }
  return r;
}

}  // namespace detail

struct QuadOptions {
  double rtol = 1e-13;
  int max_nodes = 1 << 16;
  double coincide = 1e-10;  // relative to the spectrum width
};

inline QuadResult period_integral(const PeriodIntegrand& pi, const QuadOptions& opt = {}) {
  if (pi.G.degree() < 0) return {};
  detail::BandModel m = detail::band_model(pi, opt.coincide * pi.cfg.width());
  double pf = m.prefactor();
  QuadResult r;
  if (m.h == 0.0) {
    // collapsed band: only the 1/sqrt((l-lo)(hi-l)) case survives, giving pi S
    if (m.p2 == 0 && m.q2 == 0) r.value = r.magnitude = std::numbers::pi * m.S(m.lo);
    r.magnitude = std::abs(r.magnitude);
    r.value *= m.sign;
    return r;
  }
  r = detail::theta_integral(m, 0.0, std::numbers::pi, opt.rtol, opt.max_nodes);
  r.value *= pf;
  r.magnitude *= std::abs(pf);
  return r;
}

// int_{lo}^{lam} of the band integrand, for lam inside band i.
inline QuadResult band_partial_integral(const PeriodIntegrand& pi, double lam,
                                        const QuadOptions& opt = {}) {
  if (pi.G.degree() < 0) return {};
  detail::BandModel m = detail::band_model(pi, opt.coincide * pi.cfg.width());
  if (m.h == 0.0) return {};
  double u = std::clamp((lam - m.lo) / (2.0 * m.h), 0.0, 1.0);
  double th = 2.0 * std::asin(std::sqrt(u));
  if (u >= 1.0) th = std::numbers::pi;
  QuadResult r = detail::theta_integral(m, 0.0, th, opt.rtol, std::min(opt.max_nodes, 1 << 14));
  double pf = m.prefactor();
  r.value *= pf;
  r.magnitude *= std::abs(pf);
  return r;
}

struct SignedSum {
  double value = 0;
  double max_term = 0;  // largest single-band magnitude
  bool converged = true;
};

// sum_i s_i * int_{band i} G W / sqrt(radicand) with s_i = sign(i).
inline SignedSum signed_band_sum(const Polynomial& G, const std::function<double(double)>& W,
                                 const BandConfig& cfg, const std::function<double(int)>& sign,
                                 const QuadOptions& opt = {}) {
  SignedSum s;
  for (int i = 1; i <= cfg.n(); ++i) {
    PeriodIntegrand pi{G, W, cfg, i};
    QuadResult r = period_integral(pi, opt);
    s.value += sign(i) * r.value;
    s.max_term = std::max(s.max_term, std::abs(r.value));
    s.converged = s.converged && r.converged;
  }
  return s;
}

inline double alt_sign(int i) { return (i % 2 == 0) ? 1.0 : -1.0; }

// sum_i (-1)^i int G / sqrt(radicand); zero for deg G <= n - 2.
inline SignedSum flat_identity_residual(const Polynomial& G, const BandConfig& cfg,
                                        bool allow_high_degree = false,
                                        const QuadOptions& opt = {}) {
  if (!allow_high_degree && G.degree() > cfg.n() - 2)
    throw InputError("flat identity needs deg G <= n - 2");
  return signed_band_sum(G, {}, cfg, alt_sign, opt);
}

// ---------------------------------------------------------------------------
// Divided differences of A.

namespace detail {

// Complete homogeneous symmetric polynomials h_0..h_K of y.
inline std::vector<double> complete_homogeneous(const std::vector<double>& y, int K) {
  std::vector<double> h(K + 1, 0.0);
  h[0] = 1.0;
  for (double v : y)
    for (int k = 1; k <= K; ++k) h[k] += v * h[k - 1];
  return h;
}

inline double dd_taylor(const GeneratorFunction& A, const std::vector<double>& x) {
  const int r = int(x.size()) - 1;
  double c = 0;
  for (double v : x) c += v;
  c /= x.size();
  std::vector<double> y;
  for (double v : x) y.push_back(v - c);
  const int K = 40;
  std::vector<double> h = complete_homogeneous(y, K);
  double sum = 0, fact = 1;
  for (int j = 2; j <= r; ++j) fact *= j;
  int small = 0;
  for (int m = r; m <= r + K; ++m) {
    if (m > r) fact *= m;
    double term = A.derivative(m, c) / fact * h[m - r];
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) {
      if (++small >= 2) break;
    } else {
      small = 0;
    }
    if (A.kind() != GeneratorFunction::Kind::Sqrt && A.kind() != GeneratorFunction::Kind::Table &&
        m > A.poly().degree() + 1)
      break;
  }
  return sum;
}

}  // namespace detail

// A[x_0, ..., x_r] (repeated arguments allowed).
inline double divided_difference(const GeneratorFunction& A, std::vector<double> x) {
  std::sort(x.begin(), x.end());
  if (x.size() == 1) return A(x[0]);
  double spread = x.back() - x.front();
  double reach = std::max(std::abs(x.front()), std::abs(x.back()));
  if (A.kind() == GeneratorFunction::Kind::Sqrt)
    reach = std::min(std::abs(x.front()), std::abs(x.back()));
  if (spread <= 0.1 * reach || spread == 0.0) return detail::dd_taylor(A, x);
  std::vector<double> left(x.begin(), x.end() - 1), right(x.begin() + 1, x.end());
  return (divided_difference(A, right) - divided_difference(A, left)) / spread;
}

// B(lambda) of the partial fraction A / prod_{k in J}(lambda - b_k) = sum e_k/(lambda-b_k) + B,
// and its m-th derivative: m! A[lambda (m+1 times), b_J].
inline double partial_fraction_remainder(const GeneratorFunction& A, const std::vector<double>& bJ,
                                         double lam, int m = 0) {
  std::vector<double> x(m + 1, lam);
  x.insert(x.end(), bJ.begin(), bJ.end());
  double f = 1;
  for (int j = 2; j <= m; ++j) f *= j;
  return f * divided_difference(A, x);
}

// ---------------------------------------------------------------------------
// Sign conditions.

struct SignConditionReport {
  int kmax = 0;
  std::vector<double> min_value;  // min over the grid of (-1)^{k-1} A^(k), k = 1..kmax
  std::vector<double> max_abs;
  bool pass = true;
  int first_fail = 0;
};

// (-1)^{k-1} A^(k) > 0 on [a_n, a_0], k = 1..n-1 (k <= 2 when n = 2).
inline SignConditionReport certify_sign_condition(const GeneratorFunction& A, const AxisSpectrum& a,
                                 int grid = 1000) {
  SignConditionReport rep;
  const int n = a.n();
  rep.kmax = (n == 2) ? 2 : n - 1;
  double lo = a[n], hi = a[0];
  for (int k = 1; k <= rep.kmax; ++k) {
    double mn = INFINITY, mx = 0;
    double sg = (k % 2 == 1) ? 1.0 : -1.0;
    for (int j = 0; j <= grid; ++j) {
      double lam = lo + (hi - lo) * j / grid;
      double v = A.derivative(k, lam);
      mn = std::min(mn, sg * v);
      mx = std::max(mx, std::abs(v));
    }
    rep.min_value.push_back(mn);
    rep.max_abs.push_back(mx);
    bool ok = mn > 1e-12 * std::max(mx, 1e-300) && mn > 0;
    if (!ok && rep.pass) {
      rep.pass = false;
      rep.first_fail = k;
    }
  }
  return rep;
}

// sum_i (-1)^{n-i+#I} int A prod_{j in I}(lambda - b_j) / sqrt(radicand); negative under the derivative sign condition.
inline SignedSum signed_subset_sum(const GeneratorFunction& A, const BandConfig& cfg,
                                   const std::vector<int>& I, const QuadOptions& opt = {}) {
  const int n = cfg.n();
  if (int(I.size()) > n - 2) throw InputError("subset I must have #I <= n - 2");
  std::vector<double> roots;
  for (int j : I) {
    if (j < 1 || j > n - 1) throw InputError("subset index out of range");
    roots.push_back(cfg.bl(j));
  }
  Polynomial G = Polynomial::from_roots(roots);
  const int nI = int(I.size());
  auto sg = [&](int i) { return alt_sign(n - i + nI); };
  return signed_band_sum(G, [&](double l) { return A(l); }, cfg, sg, opt);
}

// The same sum written with the remainder B of A / prod_{J}(lambda - b_k), J the complement of I.
inline SignedSum signed_subset_sum_remainder_form(const GeneratorFunction& A,
                                                  const BandConfig& cfg, const std::vector<int>& I,
                                                  const QuadOptions& opt = {}) {
  const int n = cfg.n();
  std::vector<double> bJ, all;
  for (int l = 1; l <= n - 1; ++l) {
    all.push_back(cfg.bl(l));
    if (std::find(I.begin(), I.end(), l) == I.end()) bJ.push_back(cfg.bl(l));
  }
  Polynomial G = Polynomial::from_roots(all);
  const int nI = int(I.size());
  auto sg = [&](int i) { return alt_sign(n - i + nI); };
  return signed_band_sum(
      G, [&](double l) { return partial_fraction_remainder(A, bJ, l); }, cfg, sg, opt);
}

// G_l = prod_{k != l} (lambda - b_k).
inline Polynomial G_l(const BandConfig& cfg, int l) {
  std::vector<double> r;
  for (int k = 1; k <= cfg.n() - 1; ++k)
    if (k != l) r.push_back(cfg.bl(k));
  return Polynomial::from_roots(r);
}

// sum_i (-1)^i int G_l A / sqrt(radicand), the quantity differentiated in b_l.
inline SignedSum subset_potential(const GeneratorFunction& A, const BandConfig& cfg, int l,
                                  const QuadOptions& opt = {}) {
  return signed_band_sum(G_l(cfg, l), [&](double x) { return A(x); }, cfg, alt_sign, opt);
}

struct DerivativeReport {
  double value = 0;          // two-term regularized form
  double collapsed = 0;      // single-term form with the second divided difference
  double max_term = 0;
  bool converged = true;
};

// d/db_l of subset_potential via A/(lambda - b_l) = A(b_l)/(lambda - b_l) + B(lambda, b_l).
inline DerivativeReport potential_derivative(const GeneratorFunction& A,
                                                     const BandConfig& cfg, int l,
                                                     const QuadOptions& opt = {}) {
  const int n = cfg.n();
  if (l < 1 || l > n - 1) throw InputError("index l out of range");
  std::vector<double> all;
  for (int k = 1; k <= n - 1; ++k) all.push_back(cfg.bl(k));
  Polynomial P = Polynomial::from_roots(all);
  double bl = cfg.bl(l);
  auto B = [&](double x) { return divided_difference(A, {x, bl}); };
  auto B1 = [&](double x) { return divided_difference(A, {x, bl, bl}); };
  SignedSum t1 = signed_band_sum(P, B1, cfg, alt_sign, opt);
  SignedSum t2 = signed_band_sum(G_l(cfg, l), B, cfg, alt_sign, opt);
  DerivativeReport r;
  r.value = t1.value - 0.5 * t2.value;
  r.collapsed = 0.5 * t1.value;
  r.max_term = std::max(t1.max_term, t2.max_term);
  r.converged = t1.converged && t2.converged;
  return r;
}

// G with (-1)^i G > 0 on band i for i in I1 and < 0 for i not in I1.
inline Polynomial sign_pattern_poly(const std::vector<int>& I1, const BandConfig& cfg) {
  const int n = cfg.n();
  std::vector<bool> in(n + 2, false);
  for (int i : I1) {
    if (i < 1 || i > n) throw InputError("sign pattern index out of range");
    in[i] = true;
  }
  int count = 0;
  for (int i = 1; i <= n; ++i) count += in[i];
  if (count == 0 || count == n) throw InputError("sign pattern needs I1 and its complement nonempty");
  std::vector<double> r;
  for (int k = 1; k <= n - 1; ++k)
    if (in[k] == in[k + 1]) r.push_back(cfg.bl(k));
  Polynomial G = Polynomial::from_roots(r);
  return in[1] ? (-1.0) * G : G;
}

}  // namespace liouville

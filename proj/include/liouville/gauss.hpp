#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

namespace liouville {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

namespace detail {

inline GaussRule build_legendre(int N) {
  GaussRule r;
  r.x.resize(N);
  r.w.resize(N);
  for (int i = 0; i < (N + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
    double dp = 1;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 1; j <= N; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = N * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[N - 1 - i] = z;
    r.w[i] = r.w[N - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

}  // namespace detail

// Gauss-Legendre rule with N nodes, cached per process.
inline const GaussRule& gauss_legendre(int N) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it == cache.end()) it = cache.emplace(N, detail::build_legendre(N)).first;
  return it->second;
}

// int_a^b f by N-point Gauss-Legendre.
template <class F>
double gauss_integrate(F&& f, double a, double b, int N) {
  const GaussRule& r = gauss_legendre(N);
  double m = 0.5 * (a + b), h = 0.5 * (b - a), s = 0;
  for (int k = 0; k < N; ++k) s += r.w[k] * f(m + h * r.x[k]);
  return s * h;
}

}  // namespace liouville

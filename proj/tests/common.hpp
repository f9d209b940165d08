#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "liouville/ambient.hpp"
#include "liouville/model.hpp"

namespace testing_support {

using namespace liouville;

inline const LiouvilleManifold& ell2() {
  static LiouvilleManifold M(AxisSpectrum({3, 2, 1}), GeneratorFunction::sqrt());
  return M;
}
inline const LiouvilleManifold& ell3() {
  static LiouvilleManifold M(AxisSpectrum({4, 3, 2, 1}), GeneratorFunction::sqrt());
  return M;
}

// Generic point inside the fundamental domain.
inline BandPoint interior_point(const LiouvilleManifold& M, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.08, 0.92);
  std::vector<double> x(M.n());
  for (int i = 1; i <= M.n(); ++i) x[i - 1] = U(rng) * M.alpha(i) / 4;
  return make_point(M, x);
}

// Unit covector with random direction, xi_n of either sign.
inline CovectorState random_covector(const LiouvilleManifold& M, const BandPoint& p,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> xi(M.n());
  for (double& v : xi) v = N(rng);
  return normalize_unit(M, CovectorState{p, xi});
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline std::vector<double> position(const LiouvilleManifold& M, const GeodesicTrace& tr, double t) {
  std::vector<double> z = tr.state(t);
  return ellipsoid_embed(M, make_point(M, std::vector<double>(z.begin(), z.begin() + M.n())));
}

}  // namespace testing_support

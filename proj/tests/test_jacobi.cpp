#include <gtest/gtest.h>

#include "common.hpp"
#include "liouville/cutlocus.hpp"
#include "liouville/jacobi.hpp"

using namespace liouville;
using namespace testing_support;

namespace {

const std::vector<double>& base_x() {
  static std::vector<double> x{0.3 * ell3().alpha(1) / 4, 0.55 * ell3().alpha(2) / 4,
                               0.4 * ell3().alpha(3) / 4};
  return x;
}

CovectorState covector(std::vector<double> xi) {
  return normalize_unit(ell3(), make_covector(ell3(), base_x(), std::move(xi)));
}

}  // namespace

TEST(Linearized, SymplecticProductConserved) {
  std::mt19937_64 rng(21);
  const LiouvilleManifold& M = ell3();
  for (int trial = 0; trial < 3; ++trial) {
    CovectorState eta = random_covector(M, interior_point(M, rng), rng);
    LinearizedFrame F = linearized_flow(M, eta, 10);
    EXPECT_EQ(F.k(), 3);
    EXPECT_LT(omega_drift(F), 1e-8);
  }
}

TEST(Linearized, ScalingColumnFollowsFlow) {
  const LiouvilleManifold& M = ell3();
  CovectorState eta = covector({0.4, -0.7, 0.5});
  LinearizedFrame F = linearized_flow(M, eta, 6, {eta.xi});
  GeodesicField field(M);
  for (double t : {0.5, 2.0, 6.0}) {
    std::vector<double> z = F.trace.state(t), dz(6);
    field.rhs(z.data(), dz.data());
    std::vector<double> c = F.column(t, 0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(c[i], t * dz[i], 1e-8 * t);
  }
}

TEST(Linearized, ShortTimeBlockIsInverseMetric) {
  const LiouvilleManifold& M = ell3();
  CovectorState eta = covector({0.2, 0.9, -0.3});
  std::vector<double> g = metric_at(M, eta.p);
  auto rel = [&](double t) {
    LinearizedFrame F = linearized_flow(M, eta, t);
    Eigen::MatrixXd P = F.P(t), E = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) E(i, i) = t / g[i];
    return (P - E).norm() / E.norm();
  };
  // the remainder is first order in t with a constant of about one here
  double e3 = rel(1e-3), e4 = rel(1e-4);
  EXPECT_LT(e4, 2e-4);
  EXPECT_NEAR(e3 / e4, 10.0, 1.0);
}

TEST(Linearized, MatchesFiniteDifferences) {
  const LiouvilleManifold& M = ell3();
  CovectorState eta = covector({0.5, -0.2, 0.6});
  const double T = 3, h = 1e-5;
  LinearizedFrame F = linearized_flow(M, eta, T);
  Eigen::MatrixXd P = F.P(T);
  TraceOptions to;
  to.rtol = 1e-12;
  to.atol = 1e-14;
  to.monitor_b = false;
  double worst = 0;
  for (int k = 0; k < 3; ++k) {
    CovectorState ep = eta, em = eta;
    ep.xi[k] += h;
    em.xi[k] -= h;
    GeodesicTrace tp = integrate_geodesic(M, ep, T, to), tm = integrate_geodesic(M, em, T, to);
    for (int i = 0; i < 3; ++i)
      worst = std::max(worst, std::abs((tp.coord(T, i) - tm.coord(T, i)) / (2 * h) - P(i, k)));
  }
  EXPECT_LT(worst / P.norm(), 1e-6);
}

TEST(Conjugate, NoneBeforeCutTime) {
  std::mt19937_64 rng(22);
  const LiouvilleManifold& M = ell3();
  for (int trial = 0; trial < 4; ++trial) {
    CovectorState eta = random_covector(M, interior_point(M, rng), rng);
    CutTimeResult c = cut_time(M, eta);
    ConjugateScan scan = conjugate_points(M, eta, c.t0);
    for (const auto& e : scan.events) EXPECT_GT(e.t, c.t0 - 1e-6);
    double smin = INFINITY;
    for (int s = 1; s <= 50; ++s) {
      TransversalBlock b = transversal_block(M, scan.frame.trace.state(c.t0 * s / 51.0), 2);
      smin = std::min(smin, b.sv(1));
    }
    EXPECT_GT(smin, 1e-6);
  }
}

TEST(Conjugate, TangentDirectionMeetsCutTimeOnce) {
  const LiouvilleManifold& M = ell3();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 3; ++trial) {
    // xi_n = 0: b_{n-1} = lambda_n, boundary of the hemisphere
    CovectorState eta = covector({U(rng), U(rng), 0.0});
    CutTimeResult c = cut_time(M, eta);
    ConjugateScan scan = conjugate_points(M, eta, 1.3 * c.t0);
    ASSERT_FALSE(scan.events.empty());
    EXPECT_NEAR(scan.events.front().t, c.t0, 1e-6);
    EXPECT_EQ(scan.events.front().multiplicity, 1);
  }
}

TEST(Conjugate, BaseInJHasMultiplicityTwoAlongJ) {
  const LiouvilleManifold& M = ell3();
  BandPoint p = make_point(M, {M.f(1).inverse(3.5), 0.0, M.alpha(3) / 4});
  std::vector<double> u0 = ellipsoid_embed(M, p);
  JFrame F = j_frame(M.spectrum(), u0);
  for (double c : {-1.0, 1.0}) {
    std::vector<double> v0 = j_direction(F, c, 0.7);
    JBaseCut r = cut_time_from_J(M.spectrum(), u0, v0, 200);
    EXPECT_EQ(ambient_kernel_dim(M.spectrum(), u0, v0, r.t0, 1e-6), 2);
    EXPECT_EQ(ambient_kernel_dim(M.spectrum(), u0, v0, 0.9 * r.t0, 1e-6), 0);
  }
}

TEST(ZeroPattern, ZerosAlignWithSWhenStartedThere) {
  std::mt19937_64 rng(24);
  const LiouvilleManifold& M = ell3();
  for (int trial = 0; trial < 3; ++trial) {
    CovectorState eta = random_covector(M, interior_point(M, rng), rng);
    GeodesicTrace tr = integrate_geodesic(M, eta, 12);
    for (int i = 1; i <= 2; ++i) {
      std::vector<double> S = s_set(tr, i, M.deg_tol());
      if (S.empty()) continue;
      ZeroPatternReport r = zero_pattern_audit(M, tr, i, S[0], 12);
      EXPECT_TRUE(r.s1_in_S);
      EXPECT_TRUE(r.pass) << "i = " << i;
      EXPECT_LT(r.max_alignment_error, 1e-6);
    }
  }
}

TEST(ZeroPattern, OneSElementBetweenZeros) {
  std::mt19937_64 rng(25);
  const LiouvilleManifold& M = ell3();
  for (int trial = 0; trial < 3; ++trial) {
    CovectorState eta = random_covector(M, interior_point(M, rng), rng);
    GeodesicTrace tr = integrate_geodesic(M, eta, 12);
    for (int i = 1; i <= 2; ++i) {
      ZeroPatternReport r = zero_pattern_audit(M, tr, i, 0.37, 12);
      EXPECT_FALSE(r.s1_in_S);
      if (r.inconclusive) continue;
      EXPECT_TRUE(r.interlace_ok) << "i = " << i;
    }
  }
}

TEST(ZeroPattern, FieldNonzeroInsideWindow) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> U(0, 1);
  const LiouvilleManifold& M = ell3();
  CovectorState eta = random_covector(M, interior_point(M, rng), rng);
  GeodesicTrace tr = integrate_geodesic(M, eta, 14);
  BandConfig cfg = tr.b0.config(M.spectrum());
  for (int draw = 0; draw < 40; ++draw) {
    double s1 = 3 * U(rng);
    int i = 1 + draw % 2;
    bool inS = false;
    for (double s : s_set(tr, i, M.deg_tol())) inS = inS || std::abs(s - s1) < 1e-6;
    if (inS) continue;
    // the window ends where some sigma_l has advanced by a full band excursion
    double end = 14;
    for (int l = 1; l <= 3; ++l) {
      double full = 2 * (cfg.hi(l) - cfg.lo(l)), base = tr.sigma(l, s1);
      double lo = s1, hi = 14;
      if (tr.sigma(l, hi) - base <= full) continue;
      for (int it = 0; it < 60; ++it) {
        double m = 0.5 * (lo + hi);
        (tr.sigma(l, m) - base <= full ? lo : hi) = m;
      }
      end = std::min(end, lo);
    }
    FamilyField Y = family_field(M, tr, i, s1, end);
    double s2 = s1 + (end - s1) * (0.02 + 0.98 * U(rng));
    EXPECT_GT(Y.norm(M, s2), 1e-8) << "s1 = " << s1 << " s2 = " << s2;
  }
}

TEST(Theta, VanishesOnEmptyIntervalAndIsAntisymmetric) {
  const LiouvilleManifold& M = ell3();
  BandPoint p = make_point(M, {0.3 * M.alpha(1) / 4, 0.5 * M.alpha(2) / 4, 0.4 * M.alpha(3) / 4});
  double lam0 = p.lambda[1];
  CovectorState eta = normalize_unit(M, make_covector(M, p.x, {p.lambda[0] - lam0, 0.0, p.lambda[2] - lam0}));
  TraceOptions to;
  to.monitor_b = false;
  GeodesicTrace tr = integrate_geodesic(M, eta, 5, to);
  EXPECT_EQ(compute_theta(tr, 1.1, 1.1, 2), 0.0);
  EXPECT_NEAR(compute_theta(tr, 1, 2, 2), -compute_theta(tr, 2, 1, 2), 1e-12);
  EXPECT_NEAR(compute_theta(tr, 0, 1, 2) + compute_theta(tr, 1, 2, 2), compute_theta(tr, 0, 2, 2), 1e-9);
  EXPECT_THROW(compute_theta(tr, 0, 1, 1), InputError);
}

TEST(Theta, RejectsNondegenerateGeodesic) {
  const LiouvilleManifold& M = ell3();
  GeodesicTrace tr = integrate_geodesic(M, covector({0.3, 0.5, 0.2}), 2);
  EXPECT_THROW(compute_theta(tr, 0, 1, 2), InputError);
}

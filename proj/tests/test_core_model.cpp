#include <gtest/gtest.h>

#include <random>

#include "liouville/ellipsoid.hpp"
#include "liouville/geodesic.hpp"
#include "liouville/model.hpp"
#include "oracles/oracles.hpp"

using namespace liouville;

namespace {

const LiouvilleManifold& ell2() {
  static LiouvilleManifold M(AxisSpectrum({3, 2, 1}), GeneratorFunction::sqrt());
  return M;
}
const LiouvilleManifold& ell3() {
  static LiouvilleManifold M(AxisSpectrum({4, 3, 2, 1}), GeneratorFunction::sqrt());
  return M;
}
const LiouvilleManifold& round3() {
  static LiouvilleManifold M(AxisSpectrum({4, 3, 2, 1}), GeneratorFunction::constant());
  return M;
}
const LiouvilleManifold& round2() {
  static LiouvilleManifold M(AxisSpectrum({3, 2, 1}), GeneratorFunction::constant());
  return M;
}

// Interior point with lambda strictly interlacing.
BandPoint random_point(const LiouvilleManifold& M, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.02, 0.23);
  std::vector<double> x(M.n());
  for (int i = 1; i <= M.n(); ++i) x[i - 1] = U(rng) * M.alpha(i);
  return make_point(M, x);
}

double alpha_oracle(const AxisSpectrum& a, const std::function<long double(long double)>& A, int i) {
  const int n = a.n();
  auto f = [&](long double lam, long double dl, long double dh) {
    long double p = dl * dh;  // |lambda - a_i| |lambda - a_{i-1}|
    for (int j = 0; j <= n; ++j)
      if (j != i && j != i - 1) p *= std::fabs(lam - (long double)a[j]);
    return A(lam) / std::sqrt(p);
  };
  return double(2 * oracle::tanh_sinh(f, a[i], a[i - 1], 10));
}

}  // namespace

TEST(Spectrum, RejectsNonMonotone) {
  try {
    AxisSpectrum a({3, 1, 2});
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("a1 = 1, a2 = 2"), std::string::npos);
  }
  EXPECT_THROW(AxisSpectrum({2, 1}), InputError);
  EXPECT_THROW(AxisSpectrum({2, 1, 0}), InputError);
}

TEST(Generator, DerivativesMatchFiniteDifferences) {
  std::vector<GeneratorFunction> gens = {GeneratorFunction::sqrt(), GeneratorFunction::sqrt({0, 0, 0.01}),
                                         GeneratorFunction::constant(2.0),
                                         GeneratorFunction::polynomial({1, 0.3, -0.02})};
  for (const auto& A : gens)
    for (int k = 0; k + 1 <= 3; ++k)
      for (double lam : {1.1, 2.0, 3.7}) {
        double h = 1e-5;
        double fd = (A.derivative(k, lam + h) - A.derivative(k, lam - h)) / (2 * h);
        double an = A.derivative(k + 1, lam);
        EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an))) << A.kind_name() << " k=" << k;
      }
}

TEST(Generator, NonPositiveDetected) {
  auto A = GeneratorFunction::polynomial({1.0, -0.5});
  EXPECT_THROW(LiouvilleManifold(AxisSpectrum({3, 2, 1}), A), InputError);
}

TEST(Periods, EndpointValues) {
  for (const LiouvilleManifold* M : {&ell2(), &ell3(), &round3()})
    for (int i = 1; i <= M->n(); ++i) {
      EXPECT_NEAR(M->f(i)(0.0), M->a(i), 1e-12);
      EXPECT_NEAR(M->f(i)(M->alpha(i) / 4), M->a(i - 1), 1e-12);
    }
}

TEST(Periods, MatchIndependentQuadrature) {
  // frozen from the long-double tanh-sinh oracle (10 levels)
  const double frozen[2] = {8.1988437180275806, 6.4695469424989271};
  for (int i = 1; i <= 2; ++i) {
    double ref = alpha_oracle(AxisSpectrum({3, 2, 1}), [](long double l) { return std::sqrt(l); }, i);
    EXPECT_NEAR(ell2().alpha(i), ref, 1e-9 * ref);
    EXPECT_NEAR(frozen[i - 1], ref, 1e-9 * ref);
  }
  for (int i = 1; i <= 3; ++i) {
    double ref = alpha_oracle(AxisSpectrum({4, 3, 2, 1}), [](long double l) { return std::sqrt(l); }, i);
    EXPECT_NEAR(ell3().alpha(i), ref, 1e-10 * ref);
    ref = alpha_oracle(AxisSpectrum({4, 3, 2, 1}), [](long double) { return 1.0L; }, i);
    EXPECT_NEAR(round3().alpha(i), ref, 1e-10 * ref);
  }
}

TEST(Periods, QuarterPeriodSymmetry) {
  for (const LiouvilleManifold* M : {&ell2(), &ell3()})
    for (int i = 1; i <= M->n(); ++i) {
      double al = M->alpha(i);
      for (int k = 0; k <= 200; ++k) {
        double x = -al + 3 * al * k / 200.0;
        EXPECT_NEAR(M->f(i)(-x), M->f(i)(x), 1e-10);
        EXPECT_NEAR(M->f(i)(al / 2 - x), M->f(i)(x), 1e-10);
      }
    }
}

TEST(Periods, InverseQuadratureRoundTrip) {
  // x(f) = int_{a_i}^f A / (2 sqrt((-1)^i prod(lambda - a_j))) inverts f_i on a quarter period
  const auto& M = ell3();
  const AxisSpectrum& a = M.spectrum();
  for (int i = 1; i <= 3; ++i)
    for (double s : {0.1, 0.5, 0.9}) {
      double f = a[i] + s * (a[i - 1] - a[i]);
      auto g = [&](long double lam, long double dl, long double) {
        long double p = dl * std::fabs((long double)a[i - 1] - lam);
        for (int j = 0; j <= 3; ++j)
          if (j != i && j != i - 1) p *= std::fabs(lam - (long double)a[j]);
        return std::sqrt(lam) / (2 * std::sqrt(p));
      };
      double x = double(oracle::tanh_sinh(g, a[i], f, 10));
      EXPECT_NEAR(M.f(i)(x), f, 1e-10);
    }
}

TEST(Metric, SurfaceFormula) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    BandPoint p = random_point(ell2(), rng);
    std::vector<double> g = metric_coefficients(p.lambda);
    double d = p.lambda[0] - p.lambda[1];
    EXPECT_NEAR(g[0], d, 1e-14);
    EXPECT_NEAR(g[1], d, 1e-14);
  }
}

TEST(Metric, PositiveAtRandomInteriorPoints) {
  std::mt19937_64 rng(5);
  for (const LiouvilleManifold* M : {&ell2(), &ell3()})
    for (int k = 0; k < 10000; ++k) {
      BandPoint p = random_point(*M, rng);
      for (double g : metric_at(*M, p)) ASSERT_GT(g, 0);
    }
}

TEST(Metric, BranchSetReported) {
  const auto& M = ell3();
  // lambda_2 = lambda_3 = a_2 makes the metric degenerate
  BandPoint p = make_point(M, {0.3, 0.0, M.alpha(3) / 4});
  EXPECT_THROW(metric_at(M, p), NumericalError);
}

TEST(Metric, PullbackOfAmbientMetric) {
  // sum du_i^2 pulled back through the embedding, derivatives by central differences
  const auto& M = ell3();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    BandPoint p = random_point(M, rng);
    std::vector<double> g = metric_at(M, p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double h = 1e-5;
        auto du = [&](int q) {
          std::vector<double> xp = p.x, xm = p.x;
          xp[q] += h;
          xm[q] -= h;
          auto up = ellipsoid_embed(M, make_point(M, xp)), um = ellipsoid_embed(M, make_point(M, xm));
          std::vector<double> d(4);
          for (int r = 0; r < 4; ++r) d[r] = (up[r] - um[r]) / (2 * h);
          return d;
        };
        auto di = du(i), dj = du(j);
        double gij = 0;
        for (int r = 0; r < 4; ++r) gij += di[r] * dj[r];
        EXPECT_NEAR(gij, i == j ? g[i] : 0.0, 1e-8 * std::max(1.0, g[i])) << i << j;
      }
  }
}

TEST(FirstIntegrals, HomogeneityAndLinearSystem) {
  const auto& M = ell3();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N;
  BandPoint p = random_point(M, rng);
  std::vector<double> F0 = first_integrals(M, p, {0, 0, 0});
  for (double v : F0) EXPECT_EQ(v, 0.0);
  for (int k = 0; k < 50; ++k) {
    p = random_point(M, rng);
    std::vector<double> xi = {N(rng), N(rng), N(rng)};
    std::vector<double> F = first_integrals(M, p, xi);
    std::vector<double> xi3 = {3 * xi[0], 3 * xi[1], 3 * xi[2]};
    std::vector<double> F3 = first_integrals(M, p, xi3);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(F3[j], 9 * F[j], 1e-12 * (1 + std::abs(9 * F[j])));
    // sum_j b_ij F_j = xi_i^2
    for (int i = 1; i <= 3; ++i) {
      double s = 0;
      for (int j = 1; j <= 3; ++j) s += b_matrix_entry(M, p.lambda[i - 1], i, j) * F[j - 1];
      EXPECT_NEAR(s, xi[i - 1] * xi[i - 1], 1e-10 * (1 + xi[i - 1] * xi[i - 1]));
    }
    // the last integral is 2E
    EXPECT_NEAR(F[2], twice_energy(p.lambda, xi), 1e-10 * (1 + F[2]));
  }
}

TEST(FirstIntegrals, ConservedAlongGeodesic) {
  const auto& M = ell3();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  for (int k = 0; k < 5; ++k) {
    BandPoint p = random_point(M, rng);
    CovectorState eta = normalize_unit(M, {p, {N(rng), N(rng), N(rng)}});
    std::vector<double> F0 = first_integrals(M, eta.p, eta.xi);
    GeodesicTrace tr = integrate_geodesic(M, eta, 10.0);
    for (int s = 1; s <= 20; ++s) {
      std::vector<double> z = tr.state(0.5 * s);
      std::vector<double> x(z.begin(), z.begin() + 3), xi(z.begin() + 3, z.begin() + 6);
      std::vector<double> F = first_integrals(M, make_point(M, x), xi);
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(F[j], F0[j], 1e-7);
    }
  }
}

TEST(Embedding, OnEllipsoidAndRoundTrip) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-1, 1);
  for (const LiouvilleManifold* M : {&ell2(), &ell3()}) {
    const int n = M->n();
    for (int k = 0; k < 10000; ++k) {
      std::vector<double> x(n);
      for (int i = 1; i <= n; ++i) x[i - 1] = U(rng) * M->alpha(i);
      BandPoint p = make_point(*M, x);
      std::vector<double> u = ellipsoid_embed(*M, p);
      ASSERT_NEAR(ellipsoid_constraint(M->spectrum(), u), 1.0, 1e-12);
      std::vector<double> lam = elliptic_coords(M->spectrum(), u);
      for (int i = 0; i < n; ++i) ASSERT_NEAR(lam[i], p.lambda[i], 1e-10);
      for (int i = 0; i <= n; ++i) {
        double num = M->a(i), den = 1;
        for (int q = 1; q <= n; ++q) num *= p.lambda[q - 1] - M->a(i);
        for (int j = 0; j <= n; ++j)
          if (j != i) den *= M->a(j) - M->a(i);
        ASSERT_NEAR(u[i] * u[i], num / den, 1e-10);
      }
    }
  }
}

TEST(Embedding, AllLambdaAtSpectrum) {
  const auto& M = ell3();
  BandPoint p = make_point(M, {0, 0, 0});
  std::vector<double> u = ellipsoid_embed(M, p);
  for (int i = 0; i <= 3; ++i) {
    double num = M.a(i), den = 1;
    for (int k = 1; k <= 3; ++k) num *= M.a(k) - M.a(i);
    for (int j = 0; j <= 3; ++j)
      if (j != i) den *= M.a(j) - M.a(i);
    EXPECT_NEAR(u[i] * u[i], num / den, 1e-12);
  }
  EXPECT_NEAR(u[0] * u[0], 4.0, 1e-12);
  for (int i = 1; i <= 3; ++i) EXPECT_NEAR(u[i], 0.0, 1e-12);
}

TEST(Embedding, SurfacePointByBisection) {
  // (3,2,1), lambda = (2.5, 1.5): recover lambda from u by bisection on the confocal identity
  const auto& M = ell2();
  BandPoint p = make_point(M, {M.f(1).inverse_signed(2.5, 1, 1), M.f(2).inverse_signed(1.5, 1, 1)});
  ASSERT_NEAR(p.lambda[0], 2.5, 1e-12);
  ASSERT_NEAR(p.lambda[1], 1.5, 1e-12);
  std::vector<double> u = ellipsoid_embed(M, p);
  auto F = [&](double lam) {
    double s = -1;
    for (int i = 0; i <= 2; ++i) s += u[i] * u[i] / (M.a(i) - lam);
    return s;
  };
  EXPECT_NEAR(oracle::bisect(F, 2 + 1e-12, 3 - 1e-12), 2.5, 1e-10);
  EXPECT_NEAR(oracle::bisect(F, 1 + 1e-12, 2 - 1e-12), 1.5, 1e-10);
  // closed form |u_i|
  EXPECT_NEAR(u[0] * u[0], 3 * 0.5 * 1.5 / 2, 1e-12);
}

TEST(EllipticCoords, VertexAndCompanionOracle) {
  AxisSpectrum a({3, 2, 1});
  std::vector<double> lam = elliptic_coords(a, {std::sqrt(3.0), 0, 0});
  EXPECT_NEAR(lam[0], 2.0, 1e-10);
  EXPECT_NEAR(lam[1], 1.0, 1e-10);
  // u_n = 0 puts the point in N_n
  lam = elliptic_coords(a, {std::sqrt(3.0) * 0.6, std::sqrt(2.0) * 0.8, 0});
  bool inN = std::abs(lam[1] - 1.0) < 1e-9 || std::abs(lam[0] - 1.0) < 1e-9;
  EXPECT_TRUE(inN);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> u = {N(rng), N(rng), N(rng)};
    double c = std::sqrt(ellipsoid_constraint(a, u));
    for (double& v : u) v /= c;
    std::vector<double> got = elliptic_coords(a, u);
    // prod(a_i - lam) * (sum u_i^2/(a_i - lam) - 1) as a polynomial, divided by lambda
    std::vector<double> P = {1.0};
    auto mul = [](std::vector<double> p, double r) {  // p * (r - x)
      std::vector<double> q(p.size() + 1, 0.0);
      for (std::size_t i = 0; i < p.size(); ++i) {
        q[i] += r * p[i];
        q[i + 1] -= p[i];
      }
      return q;
    };
    std::vector<double> poly(4, 0.0);
    std::vector<double> all = {1};
    for (int i = 0; i <= 2; ++i) all = mul(all, a[i]);
    for (int i = 0; i < 4; ++i) poly[i] -= all[i];
    for (int i = 0; i <= 2; ++i) {
      std::vector<double> t = {u[i] * u[i]};
      for (int j = 0; j <= 2; ++j)
        if (j != i) t = mul(t, a[j]);
      for (std::size_t q = 0; q < t.size(); ++q) poly[q] += t[q];
    }
    std::vector<double> red(poly.begin() + 1, poly.end());  // constant term vanishes on the surface
    std::vector<double> ref = oracle::companion_roots(red);
    ASSERT_EQ(ref.size(), 2u);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(got[i], ref[i], 1e-9);
  }
}

TEST(EllipticCoords, RejectsOffSurface) {
  EXPECT_THROW(elliptic_coords(AxisSpectrum({3, 2, 1}), {1, 1, 1}), InputError);
}

TEST(Classify, Examples) {
  const auto& M = ell3();
  BandPoint p = make_point(M, {0.0, 0.3, 0.4});  // f_1 = a_1, f_2 < a_1
  SubmanifoldTag t = classify_point(M, p);
  EXPECT_TRUE(t.N(1));
  EXPECT_FALSE(t.J(1));
  BandPoint q = make_point(M, {0.3, 0.0, M.alpha(3) / 4});  // f_2 = f_3 = a_2
  t = classify_point(M, q);
  EXPECT_TRUE(t.J(2));
  EXPECT_TRUE(t.N(2));
  std::mt19937_64 rng(19);
  t = classify_point(M, random_point(M, rng));
  EXPECT_FALSE(t.any());
  for (int k = 1; k <= 2; ++k)
    if (t.J(k)) {
      EXPECT_TRUE(t.N(k));
    }
}

namespace {

// Sectional curvatures of a diagonal metric g_i(x) by nested central differences.
double sectional(const LiouvilleManifold& M, const std::vector<double>& x, const Eigen::VectorXd& X,
                 const Eigen::VectorXd& Y) {
  const int n = M.n();
  const double h = 5e-5;
  auto g = [&](const std::vector<double>& y) { return metric_at(M, make_point(M, y)); };
  // Christoffel symbols Gamma^l_{ij}
  auto gamma = [&](const std::vector<double>& y) {
    std::vector<double> g0 = g(y);
    std::vector<std::vector<double>> dg(n, std::vector<double>(n));  // dg[k][i] = d_k g_i
    for (int k = 0; k < n; ++k) {
      std::vector<double> p = y, m = y;
      p[k] += h;
      m[k] -= h;
      std::vector<double> gp = g(p), gm = g(m);
      for (int i = 0; i < n; ++i) dg[k][i] = (gp[i] - gm[i]) / (2 * h);
    }
    std::vector<double> G(n * n * n, 0.0);
    auto at = [&](int l, int i, int j) -> double& { return G[(l * n + i) * n + j]; };
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0;
          if (l == i) s += dg[j][l];
          if (l == j) s += dg[i][l];
          if (i == j) s -= dg[l][i];
          at(l, i, j) = s / (2 * g0[l]);
        }
    return G;
  };
  std::vector<double> G0 = gamma(x);
  std::vector<std::vector<double>> dG(n);
  for (int k = 0; k < n; ++k) {
    std::vector<double> p = x, m = x;
    p[k] += h;
    m[k] -= h;
    std::vector<double> Gp = gamma(p), Gm = gamma(m);
    dG[k].resize(Gp.size());
    for (std::size_t q = 0; q < Gp.size(); ++q) dG[k][q] = (Gp[q] - Gm[q]) / (2 * h);
  }
  auto idx = [&](int l, int i, int j) { return (l * n + i) * n + j; };
  // R^l_{ijk} = d_j G^l_{ik} - d_k G^l_{ij} + G^l_{jm} G^m_{ik} - G^l_{km} G^m_{ij}
  auto R = [&](int l, int i, int j, int k) {
    double r = dG[j][idx(l, i, k)] - dG[k][idx(l, i, j)];
    for (int m = 0; m < n; ++m)
      r += G0[idx(l, j, m)] * G0[idx(m, i, k)] - G0[idx(l, k, m)] * G0[idx(m, i, j)];
    return r;
  };
  std::vector<double> g0 = g(x);
  double num = 0;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) num += g0[l] * X(l) * R(l, i, j, k) * Y(i) * X(j) * Y(k);
  double xx = 0, yy = 0, xy = 0;
  for (int i = 0; i < n; ++i) {
    xx += g0[i] * X(i) * X(i);
    yy += g0[i] * Y(i) * Y(i);
    xy += g0[i] * X(i) * Y(i);
  }
  return num / (xx * yy - xy * xy);
}

}  // namespace

TEST(Curvature, ConstantGeneratorGivesConstantCurvature) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> N;
  for (const LiouvilleManifold* M : {&round2(), &round3()}) {
    const int n = M->n();
    std::vector<double> K;
    for (int s = 0; s < 100; ++s) {
      BandPoint p = random_point(*M, rng);
      Eigen::VectorXd X(n), Y(n);
      for (int i = 0; i < n; ++i) {
        X(i) = N(rng);
        Y(i) = N(rng);
      }
      K.push_back(sectional(*M, p.x, X, Y));
    }
    double lo = *std::min_element(K.begin(), K.end()), hi = *std::max_element(K.begin(), K.end());
    EXPECT_GT(lo, 0);
    EXPECT_LT((hi - lo) / std::abs(hi), 1e-4) << "n=" << n << " K in [" << lo << ", " << hi << "]";
  }
  // control: the ellipsoid is not of constant curvature
  BandPoint p1 = make_point(ell2(), {0.3, 0.4}), p2 = make_point(ell2(), {1.5, 0.2});
  Eigen::VectorXd X(2), Y(2);
  X << 1, 0;
  Y << 0, 1;
  double k1 = sectional(ell2(), p1.x, X, Y), k2 = sectional(ell2(), p2.x, X, Y);
  EXPECT_GT(std::abs(k1 - k2) / std::abs(k1), 1e-2);
}

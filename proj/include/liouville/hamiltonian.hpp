#pragma once

#include <cmath>
#include <vector>

#include "model.hpp"

namespace liouville {

// Hamilton's equations for E = 1/2 sum xi_i^2 / g_i on the torus cover,
// state z = (x_1..x_n, xi_1..xi_n).
//
// With D_im = d log g_m / d lambda_i (1/(lambda_i - lambda_m) for i != m,
// -sum_{l != m} 1/(lambda_l - lambda_m) for i = m) the first and second
// x-derivatives of g_m are g_m G1[m][i] and g_m G2[m][i][j].
class GeodesicField {
 public:
  explicit GeodesicField(const LiouvilleManifold& M) : M_(&M), n_(M.n()) {}

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  const LiouvilleManifold& manifold() const { return *M_; }

  struct Local {
    std::vector<double> lam, dlam, d2lam, g;
    std::vector<double> G1;  // G1[m * n + i]
    std::vector<double> D;   // D[m * n + i]
  };

  Local local(const double* x, bool second = false) const {
    const int n = n_;
    Local L;
    L.lam.resize(n);
    L.dlam.resize(n);
    L.d2lam.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const CoordinateFunction& f = M_->f(i + 1);
      if (second) {
        auto j = f.jet(x[i]);
        L.lam[i] = j.f;
        L.dlam[i] = j.df;
        L.d2lam[i] = j.d2f;
      } else {
        double s, c, ds, dc;
        f.sin_cos(x[i], s, c, ds, dc);
        double d = f.hi() - f.lo();
        L.lam[i] = f.lo() + d * s * s;
        L.dlam[i] = 2.0 * d * s * ds;
      }
    }
    L.g = metric_coefficients(L.lam);
    L.D.assign(n * n, 0.0);
    L.G1.assign(n * n, 0.0);
    for (int m = 0; m < n; ++m) {
      double diag = 0;
      for (int i = 0; i < n; ++i) {
        if (i == m) continue;
        double r = 1.0 / (L.lam[i] - L.lam[m]);
        L.D[m * n + i] = r;
        diag -= r;
      }
      L.D[m * n + m] = diag;
      for (int i = 0; i < n; ++i) L.G1[m * n + i] = L.dlam[i] * L.D[m * n + i];
    }
    return L;
  }

  double twice_energy(const double* z) const {
    Local L = local(z);
    double e = 0;
    for (int i = 0; i < n_; ++i) e += z[n_ + i] * z[n_ + i] / L.g[i];
    return e;
  }

  void rhs(const double* z, double* dz) const {
    const int n = n_;
    Local L = local(z);
    const double* xi = z + n;
    for (int i = 0; i < n; ++i) dz[i] = xi[i] / L.g[i];
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int m = 0; m < n; ++m) s += xi[m] * xi[m] / L.g[m] * L.G1[m * n + i];
      dz[n + i] = 0.5 * s;
    }
  }

  // Row-major 2n x 2n Jacobian of the vector field.
  void jacobian(const double* z, std::vector<double>& J) const {
    const int n = n_, N = 2 * n;
    Local L = local(z, true);
    const double* xi = z + n;
    J.assign(N * N, 0.0);
    auto G2 = [&](int m, int i, int j) {
      const double* D = &L.D[m * n];
      double dD;  // d D_im / d lambda_j
      if (i != m) {
        double r = D[i];
        dD = (j == i ? -r * r : 0.0) + (j == m ? r * r : 0.0);
      } else if (j != m) {
        double r = D[j];
        dD = r * r;
      } else {
        dD = 0;
        for (int l = 0; l < n; ++l)
          if (l != m) dD -= D[l] * D[l];
      }
      double v = L.dlam[i] * L.dlam[j] * (D[i] * D[j] + dD);
      if (i == j) v += L.d2lam[i] * D[i];
      return v;
    };
    for (int i = 0; i < n; ++i) {
      J[i * N + n + i] = 1.0 / L.g[i];
      for (int j = 0; j < n; ++j) {
        J[i * N + j] = -xi[i] * L.G1[i * n + j] / L.g[i];
        J[(n + i) * N + n + j] = xi[j] * L.G1[j * n + i] / L.g[j];
        double s = 0;
        for (int m = 0; m < n; ++m)
          s += xi[m] * xi[m] / L.g[m] *
               (G2(m, i, j) - 2.0 * L.G1[m * n + i] * L.G1[m * n + j]);
        J[(n + i) * N + j] = 0.5 * s;
      }
    }
  }

  // State (z, columns c_1..c_k), each column of length 2n.
  void variational_rhs(const double* Z, double* dZ, int k) const {
    const int N = 2 * n_;
    rhs(Z, dZ);
    std::vector<double> J;
    jacobian(Z, J);
    for (int c = 0; c < k; ++c) {
      const double* col = Z + N + c * N;
      double* out = dZ + N + c * N;
      for (int r = 0; r < N; ++r) {
        double s = 0;
        for (int q = 0; q < N; ++q) s += J[r * N + q] * col[q];
        out[r] = s;
      }
    }
  }

 private:
  const LiouvilleManifold* M_;
  int n_;
};

}  // namespace liouville

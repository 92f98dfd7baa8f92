#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

// High-order finite differences on tensor-product grids. Fields are stored
// with the first grid direction (u) along rows and the second (v) along
// columns; v supports periodic wrap (7-point central stencils), u uses
// 8-point windows clamped at the edges (one-sided near the boundary).
// Interior accuracy is 6th order in both directions.
namespace wedgecmc {
namespace fd {

// Fornberg's algorithm: weights c(j, k) such that the k-th derivative at z is
// approximated by sum_j c(j, k) f(x_j), for k = 0..m.
inline Eigen::MatrixXd fornbergWeights(double z, const double* x, int n, int m) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m + 1);
  double c1 = 1.0;
  double c4 = x[0] - z;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        }
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      }
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace detail {

// Row-direction derivative of the given order using 8-point clamped windows.
inline Eigen::MatrixXd rowDerivative(const Eigen::MatrixXd& f, double h, int order) {
  const int n = static_cast<int>(f.rows());
  constexpr int kWindow = 8;
  if (n < kWindow) {
    throw std::invalid_argument("u-derivative needs at least 8 rows");
  }
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  double nodes[kWindow];
  for (int a = 0; a < kWindow; ++a) nodes[a] = a * h;
  Eigen::MatrixXd out(n, f.cols());
  for (int i = 0; i < n; ++i) {
    const int w = std::clamp(i - kWindow / 2 + 1, 0, n - kWindow);
    const Eigen::MatrixXd wts =
        fornbergWeights((i - w) * h, nodes, kWindow, order);
    out.row(i).setZero();
    for (int a = 0; a < kWindow; ++a) {
      out.row(i) += wts(a, order) * f.row(w + a);
    }
  }
  return out;
}

// Periodic column-direction derivative, 7-point central stencil.
inline Eigen::MatrixXd colDerivativePeriodic(const Eigen::MatrixXd& f, double h,
                                             int order) {
  const Eigen::Index m = f.cols();
  if (m < 7) throw std::invalid_argument("v-derivative needs at least 7 columns");
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  double w[7];
  if (order == 1) {
    const double s = 1.0 / (60.0 * h);
    const double cw[7] = {-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0};
    for (int a = 0; a < 7; ++a) w[a] = cw[a] * s;
  } else {
    const double s = 1.0 / (180.0 * h * h);
    const double cw[7] = {2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0};
    for (int a = 0; a < 7; ++a) w[a] = cw[a] * s;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (int a = -3; a <= 3; ++a) {
      const Eigen::Index ja = (j + a + 2 * m) % m;
      out.col(j) += w[a + 3] * f.col(ja);
    }
  }
  return out;
}

}  // namespace detail

inline Eigen::MatrixXd partialU(const Eigen::MatrixXd& f, double h) {
  return detail::rowDerivative(f, h, 1);
}
inline Eigen::MatrixXd partialUU(const Eigen::MatrixXd& f, double h) {
  return detail::rowDerivative(f, h, 2);
}
inline Eigen::MatrixXd partialVPeriodic(const Eigen::MatrixXd& f, double h) {
  return detail::colDerivativePeriodic(f, h, 1);
}
inline Eigen::MatrixXd partialVVPeriodic(const Eigen::MatrixXd& f, double h) {
  return detail::colDerivativePeriodic(f, h, 2);
}
inline Eigen::MatrixXd partialUVPeriodic(const Eigen::MatrixXd& f, double hu,
                                         double hv) {
  return detail::colDerivativePeriodic(detail::rowDerivative(f, hu, 1), hv, 1);
}

}  // namespace fd
}  // namespace wedgecmc

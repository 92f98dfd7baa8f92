#include "wedgecmc/rings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wedgecmc/fd.hpp"

namespace wedgecmc {
namespace rings {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

int autoNu(double uSpan, int nv) {
  const int byAspect = static_cast<int>(std::ceil(nv * uSpan / kTwoPi)) + 1;
  return std::max(33, byAspect);
}

void validateGrid(const GridSpec& grid) {
  if (grid.nv < 16) throw std::invalid_argument("v grid needs at least 16 nodes");
  if (grid.nu != 0 && grid.nu < 8) {
    throw std::invalid_argument("u grid needs at least 8 nodes");
  }
}

CurvatureChart allocateChart(double u0, int nu, int nv, double meanCurv) {
  CurvatureChart chart;
  chart.u = Eigen::VectorXd::LinSpaced(nu, u0, 0.0);
  chart.v.resize(nv);
  for (int j = 0; j < nv; ++j) chart.v(j) = kTwoPi * static_cast<double>(j) / nv;
  for (int k = 0; k < 3; ++k) {
    chart.X[k].resize(nu, nv);
    chart.N[k].resize(nu, nv);
  }
  chart.H = meanCurv;
  return chart;
}

double chartScale(const CurvatureChart& chart) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int k = 0; k < 3; ++k) {
    lo(k) = chart.X[k].minCoeff();
    hi(k) = chart.X[k].maxCoeff();
  }
  return (hi - lo).norm();
}

double medianOf(std::vector<double>& values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}

void requireGap(CurvatureChart& chart) { curvatureGap(chart); }

// ---------------------------------------------------------------------------
// Axisymmetric profile integration.
//
// Meridian in arclength t: r' = cos(psi), z' = sin(psi),
// psi' = 2H - sin(psi)/r, with the rotation flux Q = H r^2 - r sin(psi)
// conserved. Contact angles enter as psi(bottom) = pi - gamma1 and
// psi(top) = gamma2 (tangential top contact gamma2 = pi is the event
// psi = pi).
// ---------------------------------------------------------------------------

struct ProfileState {
  double r = 0.0, z = 0.0, psi = 0.0, u = 0.0;  // u = integral of dt / r
};

ProfileState profileStep(const ProfileState& s, double H, double h) {
  auto deriv = [H](const ProfileState& y, double out[4]) {
    out[0] = std::cos(y.psi);
    out[1] = std::sin(y.psi);
    out[2] = 2.0 * H - std::sin(y.psi) / y.r;
    out[3] = 1.0 / y.r;
  };
  auto advance = [](const ProfileState& y, const double d[4], double dt) {
    ProfileState o;
    o.r = y.r + dt * d[0];
    o.z = y.z + dt * d[1];
    o.psi = y.psi + dt * d[2];
    o.u = y.u + dt * d[3];
    return o;
  };
  double k1[4], k2[4], k3[4], k4[4];
  deriv(s, k1);
  deriv(advance(s, k1, 0.5 * h), k2);
  deriv(advance(s, k2, 0.5 * h), k3);
  deriv(advance(s, k3, h), k4);
  ProfileState o;
  o.r = s.r + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
  o.z = s.z + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  o.psi = s.psi + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
  o.u = s.u + h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
  return o;
}

struct ShotResult {
  bool ok = false;
  ProfileState end;  // state at the stopping event
};

// Integrates from the bottom plate until the stopping event: z = L upcrossing
// (normal mode) or psi = pi upcrossing (tangential mode).
ShotResult shoot(double r0, double gamma1, double L, double H, bool tangential,
                 double stepScale) {
  ProfileState s;
  s.r = r0;
  s.psi = kPi - gamma1;
  const double scale = std::max(L, 1.0 / H);
  const double h = scale / stepScale;
  const double tMax = 16.0 * scale + 8.0 * r0;
  const double rMin = 1e-9 * scale;
  auto eventFn = [&](const ProfileState& y) {
    return tangential ? y.psi - kPi : y.z - L;
  };
  double prev = eventFn(s);
  if (prev >= 0.0) return {};
  for (double t = 0.0; t < tMax; t += h) {
    const ProfileState nx = profileStep(s, H, h);
    if (!(nx.r > rMin) || !std::isfinite(nx.r) || !std::isfinite(nx.psi) ||
        nx.z < -0.25 * scale || std::abs(nx.psi) > 4.0 * kPi) {
      return {};
    }
    const double now = eventFn(nx);
    if (prev < 0.0 && now >= 0.0) {
      double lo = 0.0, hi = h;
      ProfileState cand = nx;
      for (int it = 0; it < 100 && hi - lo > 1e-16 * h; ++it) {
        const double mid = 0.5 * (lo + hi);
        const ProfileState m = profileStep(s, H, mid);
        if (eventFn(m) >= 0.0) {
          hi = mid;
          cand = m;
        } else {
          lo = mid;
        }
      }
      ShotResult out;
      out.ok = true;
      out.end = cand;
      return out;
    }
    prev = now;
    s = nx;
  }
  return {};
}

// Shooting residual as a function of the bottom radius; NaN when the profile
// never reaches the stopping event.
double shotResidual(double r0, double gamma1, double gamma2, double L, double H,
                    bool tangential, double stepScale) {
  const ShotResult shot_ = shoot(r0, gamma1, L, H, tangential, stepScale);
  if (!shot_.ok) return std::numeric_limits<double>::quiet_NaN();
  return tangential ? shot_.end.z - L : shot_.end.psi - gamma2;
}

// Scans [lo, hi] for the first sign change of the residual and bisects it.
std::optional<double> bracketAndBisect(double lo, double hi, int scanSteps,
                                       double gamma1, double gamma2, double L,
                                       double H, bool tangential) {
  double prevR = std::numeric_limits<double>::quiet_NaN();
  double prevF = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i <= scanSteps; ++i) {
    const double r = lo + (hi - lo) * static_cast<double>(i) / scanSteps;
    const double fr = shotResidual(r, gamma1, gamma2, L, H, tangential, 2048.0);
    if (std::isfinite(fr) && std::isfinite(prevF) &&
        ((fr <= 0.0) != (prevF <= 0.0))) {
      double a = prevR, b = r;
      double fa = shotResidual(a, gamma1, gamma2, L, H, tangential, 8192.0);
      double fb = shotResidual(b, gamma1, gamma2, L, H, tangential, 8192.0);
      if (!std::isfinite(fa) || !std::isfinite(fb) || (fa <= 0.0) == (fb <= 0.0)) {
        prevR = r;
        prevF = fr;
        continue;  // coarse/fine step disagreement; keep scanning
      }
      for (int it = 0; it < 90 && b - a > 1e-15 * std::max(1.0, b); ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = shotResidual(mid, gamma1, gamma2, L, H, tangential, 8192.0);
        if (!std::isfinite(fm)) break;
        if ((fm <= 0.0) == (fa <= 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
          fb = fm;
        }
      }
      return 0.5 * (a + b);
    }
    if (std::isfinite(fr)) {
      prevR = r;
      prevF = fr;
    } else {
      prevF = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return std::nullopt;
}

}  // namespace

CurvatureChart cylinderChart(double a, double height, GridSpec grid) {
  if (!(a > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("cylinder radius and height must be positive");
  }
  validateGrid(grid);
  const double u0 = -height / a;
  const int nv = grid.nv;
  const int nu = grid.nu > 0 ? grid.nu : autoNu(-u0, nv);
  CurvatureChart chart = allocateChart(u0, nu, nv, 1.0 / (2.0 * a));
  for (int i = 0; i < nu; ++i) {
    const double z = a * chart.u(i);
    for (int j = 0; j < nv; ++j) {
      const double cv = std::cos(chart.v(j)), sv = std::sin(chart.v(j));
      chart.X[0](i, j) = a * cv;
      chart.X[1](i, j) = a * sv;
      chart.X[2](i, j) = z;
      chart.N[0](i, j) = -cv;
      chart.N[1](i, j) = -sv;
      chart.N[2](i, j) = 0.0;
    }
  }
  return chart;
}

CurvatureChart sphereBandChart(double R, double u0, GridSpec grid, const Vec3& center,
                               const Eigen::Matrix3d& frame) {
  if (!(R > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  if (!(u0 < 0.0)) throw std::invalid_argument("band must have u0 < 0");
  validateGrid(grid);
  const int nv = grid.nv;
  const int nu = grid.nu > 0 ? grid.nu : autoNu(-u0, nv);
  CurvatureChart chart = allocateChart(u0, nu, nv, 1.0 / R);
  for (int i = 0; i < nu; ++i) {
    const double sech = 1.0 / std::cosh(chart.u(i));
    const double tanh = std::tanh(chart.u(i));
    for (int j = 0; j < nv; ++j) {
      const Vec3 m = frame * Vec3(sech * std::cos(chart.v(j)),
                                  sech * std::sin(chart.v(j)), tanh);
      const Vec3 X = center + R * m;
      for (int k = 0; k < 3; ++k) {
        chart.X[k](i, j) = X(k);
        chart.N[k](i, j) = -m(k);
      }
    }
  }
  return chart;
}

CurvatureChart delaunayBridge(double gamma1, double gamma2, double separation,
                              double meanCurv, GridSpec grid,
                              std::optional<double> fluxGuess,
                              BridgeProfile* profileOut) {
  if (!(gamma1 > 0.0 && gamma1 < kPi)) {
    throw std::invalid_argument("bottom contact angle must lie in (0, pi)");
  }
  if (!(gamma2 > 0.0 && gamma2 <= kPi)) {
    throw std::invalid_argument("top contact angle must lie in (0, pi]");
  }
  if (!(separation > 0.0)) throw std::invalid_argument("separation must be positive");
  if (!(meanCurv > 0.0)) throw std::invalid_argument("mean curvature must be positive");
  validateGrid(grid);

  const double L = separation;
  const double H = meanCurv;
  const bool tangential = gamma2 >= kPi - 1e-12;

  // Locate the bottom radius r0 by shooting. A flux guess selects the branch
  // through Q = H r0^2 - r0 sin(gamma1); otherwise scan for the first root.
  std::optional<double> r0;
  if (fluxGuess) {
    const double disc = std::sin(gamma1) * std::sin(gamma1) + 4.0 * H * (*fluxGuess);
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double cand :
           {(std::sin(gamma1) + sq) / (2.0 * H), (std::sin(gamma1) - sq) / (2.0 * H)}) {
        if (!(cand > 0.0)) continue;
        r0 = bracketAndBisect(0.7 * cand, 1.4 * cand, 64, gamma1, gamma2, L, H,
                              tangential);
        if (r0) break;
      }
    }
  }
  if (!r0) {
    r0 = bracketAndBisect(1e-3 * std::min(1.0 / H, L), 3.0 / H + L, 800, gamma1,
                          gamma2, L, H, tangential);
  }
  if (!r0) throw std::runtime_error("no bridge for parameters");

  const ShotResult fine = shoot(*r0, gamma1, L, H, tangential, 16384.0);
  if (!fine.ok) throw std::runtime_error("profile integration failed");

  const double uSpan = fine.end.u;
  const int nv = grid.nv;
  const int nu = grid.nu > 0 ? grid.nu : autoNu(uSpan, nv);

  // Second pass in the conformal coordinate u (du/dt = 1/r): step exactly to
  // the chart nodes so no interpolation error enters the grid.
  struct Row {
    double r, z, psi;
  };
  std::vector<Row> rows(static_cast<std::size_t>(nu));
  {
    double y[3] = {*r0, 0.0, kPi - gamma1};
    auto deriv = [H](const double s[3], double out[3]) {
      out[0] = s[0] * std::cos(s[2]);
      out[1] = s[0] * std::sin(s[2]);
      out[2] = 2.0 * H * s[0] - std::sin(s[2]);
    };
    rows[0] = {y[0], y[1], y[2]};
    const double du = uSpan / (nu - 1);
    constexpr int kSub = 64;
    for (int i = 1; i < nu; ++i) {
      const double h = du / kSub;
      for (int sIdx = 0; sIdx < kSub; ++sIdx) {
        double k1[3], k2[3], k3[3], k4[3], tmp[3];
        deriv(y, k1);
        for (int k = 0; k < 3; ++k) tmp[k] = y[k] + 0.5 * h * k1[k];
        deriv(tmp, k2);
        for (int k = 0; k < 3; ++k) tmp[k] = y[k] + 0.5 * h * k2[k];
        deriv(tmp, k3);
        for (int k = 0; k < 3; ++k) tmp[k] = y[k] + h * k3[k];
        deriv(tmp, k4);
        for (int k = 0; k < 3; ++k) {
          y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
      }
      rows[static_cast<std::size_t>(i)] = {y[0], y[1], y[2]};
    }
  }

  CurvatureChart chart = allocateChart(-uSpan, nu, nv, H);
  for (int i = 0; i < nu; ++i) {
    const Row& row = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < nv; ++j) {
      const double cv = std::cos(chart.v(j)), sv = std::sin(chart.v(j));
      chart.X[0](i, j) = row.r * cv;
      chart.X[1](i, j) = row.r * sv;
      chart.X[2](i, j) = row.z;
      chart.N[0](i, j) = -std::sin(row.psi) * cv;
      chart.N[1](i, j) = -std::sin(row.psi) * sv;
      chart.N[2](i, j) = std::cos(row.psi);
    }
  }

  if (profileOut) {
    profileOut->flux = H * (*r0) * (*r0) - (*r0) * std::sin(gamma1);
    profileOut->r0 = *r0;
    profileOut->rTop = rows.back().r;
    profileOut->arclength = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double dr = rows[i].r - rows[i - 1].r;
      const double dz = rows[i].z - rows[i - 1].z;
      profileOut->arclength += std::hypot(dr, dz);
    }
    profileOut->uSpan = uSpan;
    profileOut->bcResidual = tangential ? std::abs(fine.end.z - L)
                                        : std::abs(fine.end.psi - gamma2);
  }
  return chart;
}

void fundamentalForms(CurvatureChart& chart) {
  const int nu = chart.nu(), nv = chart.nv();
  if (nu < 8) throw std::invalid_argument("fundamental forms need at least 8 u-rows");
  if (nv < 16) throw std::invalid_argument("fundamental forms need at least 16 v-columns");
  const double du = chart.du(), dv = chart.dv();
  if (!(du > 0.0)) throw std::invalid_argument("degenerate grid: u spacing is zero");
  for (int i = 1; i < nu; ++i) {
    if (std::abs(chart.u(i) - chart.u(i - 1) - du) > 1e-9 * du) {
      throw std::invalid_argument("u grid must be uniform");
    }
  }

  std::array<Eigen::MatrixXd, 3> Xu, Xv, Xuu, Xvv, Xuv;
  for (int k = 0; k < 3; ++k) {
    Xu[k] = fd::partialU(chart.X[k], du);
    Xv[k] = fd::partialVPeriodic(chart.X[k], dv);
    Xuu[k] = fd::partialUU(chart.X[k], du);
    Xvv[k] = fd::partialVVPeriodic(chart.X[k], dv);
    Xuv[k] = fd::partialUVPeriodic(chart.X[k], du, dv);
  }
  auto dot3 = [](const std::array<Eigen::MatrixXd, 3>& A,
                 const std::array<Eigen::MatrixXd, 3>& B) {
    return Eigen::MatrixXd((A[0].array() * B[0].array() + A[1].array() * B[1].array() +
                            A[2].array() * B[2].array())
                               .matrix());
  };
  chart.E = dot3(Xu, Xu);
  chart.F = dot3(Xu, Xv);
  chart.G = dot3(Xv, Xv);
  chart.e = dot3(Xuu, chart.N);
  chart.f = dot3(Xuv, chart.N);
  chart.g = dot3(Xvv, chart.N);
  if (!(chart.E.minCoeff() > 0.0) || !(chart.G.minCoeff() > 0.0)) {
    throw std::runtime_error("degenerate grid: immersion fails (E or G <= 0)");
  }
}

GapEstimate curvatureGap(CurvatureChart& chart) {
  if (!chart.hasForms()) fundamentalForms(chart);
  const Eigen::MatrixXd diff = chart.e - chart.g;
  std::vector<double> values(diff.data(), diff.data() + diff.size());
  GapEstimate out;
  out.c = medianOf(values);
  out.maxDeviation = (diff.array() - out.c).abs().maxCoeff();
  chart.c = out.c;
  return out;
}

BoundaryCurvature boundaryCurvatureRelation(CurvatureChart& chart, UEdge edge,
                                            double gamma) {
  if (!(gamma > 0.0 && gamma < kPi)) {
    throw std::invalid_argument("contact angle must lie in (0, pi)");
  }
  requireGap(chart);
  const int nu = chart.nu(), nv = chart.nv();
  const int row = edge == UEdge::Low ? 0 : nu - 1;

  Eigen::MatrixXd P(nv, 3);
  for (int j = 0; j < nv; ++j) P.row(j) = chart.point(row, j).transpose();
  const Eigen::RowVector3d centroid = P.colwise().mean();
  const Eigen::MatrixXd Q = P.rowwise() - centroid;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(Q.transpose() * Q / nv);
  const Vec3 planeNormal = eig.eigenvectors().col(0);
  const double spread = std::sqrt(std::max(eig.eigenvalues()(2), 1e-300));
  const double planarResidual = (Q * planeNormal).cwiseAbs().maxCoeff();
  if (planarResidual > 1e-6 * spread) {
    throw std::runtime_error("boundary not planar");
  }

  // Circle fit inside the plane (algebraic least squares).
  const Vec3 e1 = eig.eigenvectors().col(2);
  const Vec3 e2 = eig.eigenvectors().col(1);
  Eigen::MatrixXd A(nv, 3);
  Eigen::VectorXd b(nv);
  for (int j = 0; j < nv; ++j) {
    const double q1 = Q.row(j).dot(e1.transpose());
    const double q2 = Q.row(j).dot(e2.transpose());
    A(j, 0) = 2.0 * q1;
    A(j, 1) = 2.0 * q2;
    A(j, 2) = 1.0;
    b(j) = q1 * q1 + q2 * q2;
  }
  const Eigen::Vector3d sol = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  const double radius = std::sqrt(std::max(
      1e-300, sol(2) + sol(0) * sol(0) + sol(1) * sol(1)));

  BoundaryCurvature out;
  std::vector<double> k2s(static_cast<std::size_t>(nv));
  for (int j = 0; j < nv; ++j) {
    k2s[static_cast<std::size_t>(j)] = chart.H - chart.c / (2.0 * chart.E(row, j));
  }
  out.k2Normal = medianOf(k2s);
  out.kPlanar = 1.0 / radius;
  out.residual = std::abs(out.k2Normal - out.kPlanar * std::sin(gamma));
  return out;
}

TangentialContact tangentialContactCheck(CurvatureChart& chart, UEdge edge,
                                         double gamma) {
  const bool zero = std::abs(gamma) <= 1e-9;
  const bool pi = std::abs(gamma - kPi) <= 1e-9;
  if (!zero && !pi) {
    throw std::invalid_argument("tangential check requires contact angle 0 or pi");
  }
  requireGap(chart);
  const int nu = chart.nu(), nv = chart.nv();
  const int row = edge == UEdge::Low ? 0 : nu - 1;

  Vec3 centroid = Vec3::Zero();
  for (int j = 0; j < nv; ++j) centroid += chart.point(row, j);
  centroid /= nv;
  double ringSpread = 0.0;
  for (int j = 0; j < nv; ++j) {
    ringSpread = std::max(ringSpread, (chart.point(row, j) - centroid).norm());
  }
  TangentialContact out;
  if (ringSpread < 1e-9 * chartScale(chart)) {
    out.degenerate = true;
    out.residual = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  for (int j = 0; j < nv; ++j) {
    out.residual =
        std::max(out.residual, std::abs(chart.H - chart.c / (2.0 * chart.E(row, j))));
  }
  return out;
}

TriMesh chartToMesh(const CurvatureChart& chart) {
  const int nu = chart.nu(), nv = chart.nv();
  TriMesh mesh;
  mesh.V.resize(nu * nv, 3);
  mesh.N.resize(nu * nv, 3);
  mesh.F.resize(2 * (nu - 1) * nv, 3);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      mesh.V.row(i * nv + j) = chart.point(i, j).transpose();
      mesh.N.row(i * nv + j) = chart.normal(i, j).transpose();
    }
  }
  int fIdx = 0;
  for (int i = 0; i + 1 < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const int jn = (j + 1) % nv;
      const int v00 = i * nv + j;
      const int v10 = (i + 1) * nv + j;
      const int v11 = (i + 1) * nv + jn;
      const int v01 = i * nv + jn;
      mesh.F.row(fIdx++) << v00, v10, v11;
      mesh.F.row(fIdx++) << v00, v11, v01;
    }
  }
  return mesh;
}

}  // namespace rings
}  // namespace wedgecmc

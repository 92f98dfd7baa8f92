#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "wedgecmc/mesh.hpp"

namespace wedgecmc {
namespace rings {

// Gridded conformal curvature-coordinate chart of a rotationally generated
// CMC surface. Domain [u0, 0] x [0, 2*pi), periodic in v (the seam column is
// not duplicated). Rows index u, columns index v.
struct CurvatureChart {
  Eigen::VectorXd u;  // size nu, uniform ascending, u.tail(1) == 0
  Eigen::VectorXd v;  // size nv, v_j = 2*pi*j/nv
  std::array<Eigen::MatrixXd, 3> X;  // position samples, nu x nv per component
  std::array<Eigen::MatrixXd, 3> N;  // unit inward normal samples
  double H = 0.0;                    // target constant mean curvature

  // Fundamental-form fields, filled by fundamentalForms().
  Eigen::MatrixXd E, F, G;  // first form (E = X_u.X_u, F = X_u.X_v, G = X_v.X_v)
  Eigen::MatrixXd e, f, g;  // second form against N
  double c = 0.0;           // curvature gap e - g, filled by curvatureGap()

  int nu() const { return static_cast<int>(u.size()); }
  int nv() const { return static_cast<int>(v.size()); }
  double du() const { return u.size() > 1 ? u(1) - u(0) : 0.0; }
  double dv() const { return 2.0 * 3.14159265358979323846 / static_cast<double>(v.size()); }
  bool hasForms() const { return E.size() > 0; }
  Vec3 point(int i, int j) const {
    return Vec3(X[0](i, j), X[1](i, j), X[2](i, j));
  }
  Vec3 normal(int i, int j) const {
    return Vec3(N[0](i, j), N[1](i, j), N[2](i, j));
  }
};

struct GridSpec {
  int nu = 0;    // 0: choose from the u-range/v-range aspect ratio
  int nv = 256;  // nodes per v period (>= 64 for stable stencils)
};

// Right circular cylinder of radius a about the x3-axis, height along -x3
// from z = 0. Closed forms: E = G = a^2, F = 0, e = 0, g = a, c = -a,
// H = 1/(2a), k1 = 0 (axial), k2 = 1/a.
CurvatureChart cylinderChart(double a, double height, GridSpec grid);

// Mercator band of a sphere: u in [u0, 0] (equator at u = 0), optional
// center/frame for repositioned copies. Umbilic: c = 0, k1 = k2 = H = 1/R.
CurvatureChart sphereBandChart(double R, double u0, GridSpec grid,
                               const Vec3& center = Vec3::Zero(),
                               const Eigen::Matrix3d& frame = Eigen::Matrix3d::Identity());

// Axisymmetric CMC bridge between the plates x3 = 0 and x3 = separation with
// contact angles gamma1 (bottom) and gamma2 (top). gamma2 = pi is accepted as
// tangential top contact (profile integrated to the horizontal-tangent event).
// The rotation-invariant flux Q = H r^2 - r sin(psi) selects the profile
// branch; fluxGuess, when given, seeds the shooting near that branch.
struct BridgeProfile {
  double flux = 0.0;        // conserved Q
  double r0 = 0.0;          // profile radius at the bottom plate
  double rTop = 0.0;        // profile radius at the top boundary
  double arclength = 0.0;   // total meridian arclength
  double uSpan = 0.0;       // conformal-coordinate span (-u0)
  double bcResidual = 0.0;  // achieved boundary-condition residual
};
CurvatureChart delaunayBridge(double gamma1, double gamma2, double separation,
                              double meanCurv, GridSpec grid,
                              std::optional<double> fluxGuess = std::nullopt,
                              BridgeProfile* profileOut = nullptr);

// Fills E, F, G, e, f, g from the sampled positions/normals via 4th-order
// finite differences (periodic in v, one-sided at the u edges).
void fundamentalForms(CurvatureChart& chart);

struct GapEstimate {
  double c = 0.0;             // median of e - g over all nodes
  double maxDeviation = 0.0;  // max |(e - g) - c|
};
GapEstimate curvatureGap(CurvatureChart& chart);  // computes forms if absent

enum class UEdge { Low, High };  // u = u0 row / u = 0 row

// Relates the normal curvature of a planar boundary row, k2 = H - c/(2E), to
// the curvature k of the boundary curve inside its plane: k2 = k sin(gamma).
struct BoundaryCurvature {
  double k2Normal = 0.0;
  double kPlanar = 0.0;
  double residual = 0.0;  // |k2 - k sin(gamma)|
};
BoundaryCurvature boundaryCurvatureRelation(CurvatureChart& chart, UEdge edge,
                                            double gamma);

// At a tangential boundary ring (contact angle 0 or pi) the parallel normal
// curvature k2 = H - c/(2E) must vanish on the ring.
struct TangentialContact {
  double residual = 0.0;  // max |H - c/(2E)| over the boundary row
  bool degenerate = false;  // ring collapsed to a point
};
TangentialContact tangentialContactCheck(CurvatureChart& chart, UEdge edge,
                                         double gamma);

// Quad-split triangle mesh over the chart grid (v seam closed by index wrap).
TriMesh chartToMesh(const CurvatureChart& chart);

}  // namespace rings
}  // namespace wedgecmc

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "wedgecmc/geom.hpp"
#include "wedgecmc/mesh.hpp"
#include "wedgecmc/rings.hpp"

namespace wedgecmc {
namespace reflect {

// Unit image of a normal under the differential of the inversion
// X -> (rho^2/|X|^2) X: the Householder reflection through the radial
// direction (the conformal factor drops out after normalization).
template <typename DX, typename DN>
Vec3 reflectUnitNormal(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DN>& N) {
  const Vec3 x = X;
  const double n2 = x.squaredNorm();
  if (!(n2 > 0.0)) throw std::domain_error("normal image undefined at the origin");
  return Vec3(N) - (2.0 * x.dot(N) / n2) * x;
}

// Mean curvature of the inverted surface at the image of X:
// (1/rho^2) (|X|^2 H + 2 X.N), with N the unit inward normal at X.
double reflectedMeanCurvature(const Vec3& X, const Vec3& N, double H, double rho);

// Radius at which the reflected mean curvature first reaches H again:
// sqrt((|X|^2 H + 2 X.N) / H). Empty when the radicand is nonpositive
// (then the reflected curvature stays at or below H for every radius).
std::optional<double> firstFailureRadius(const Vec3& X, const Vec3& N, double H);

struct ReflectedSurface {
  TriMesh mesh;          // image vertices with image normals
  Eigen::VectorXd hatH;  // reflected mean curvature per vertex
  double rho = 0.0;
};

// Pointwise inversion of a mesh with the stated constant mean curvature H.
// Throws when a vertex is within eps_geom of the inversion center (origin).
ReflectedSurface reflectSurface(const TriMesh& mesh, double meanCurv, double rho);

struct DiscreteCurvature {
  Eigen::VectorXd H;            // per-vertex estimate against stored normals
  std::vector<char> reliable;   // 0 for boundary vertices (incomplete one-ring)
};

// Cotangent-weighted mean-curvature-vector estimate with mixed Voronoi areas,
// projected on the stored per-vertex normals.
DiscreteCurvature discreteMeanCurvature(const TriMesh& mesh);

struct SubharmonicityResult {
  bool hPositive = true;       // requires H > 0; false short-circuits the check
  double minLaplacian = 0.0;   // min of the intrinsic Laplacian of hatH
  double maxHat = 0.0;         // max hatH over the subdomain {|X| >= rho}
  bool maximizerOnBoundary = false;  // argmax on the subdomain boundary
  int subdomainNodes = 0;
  int interiorNodes = 0;
};

// Evaluates hatH(X, rho) on the chart subdomain {|X| >= rho} and its
// intrinsic Laplacian (hatH_uu + hatH_vv)/E; the positivity of the minimum
// over interior nodes is the subharmonicity statement under test.
SubharmonicityResult subharmonicityCheck(rings::CurvatureChart& chart, double rho);

}  // namespace reflect
}  // namespace wedgecmc

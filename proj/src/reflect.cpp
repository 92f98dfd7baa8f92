#include "wedgecmc/reflect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wedgecmc/fd.hpp"
#include "wedgecmc/util.hpp"

namespace wedgecmc {
namespace reflect {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double reflectedMeanCurvature(const Vec3& X, const Vec3& N, double H, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("inversion radius must be positive");
  const double n2 = X.squaredNorm();
  if (!(n2 > 0.0)) throw std::domain_error("reflected curvature undefined at the origin");
  return (n2 * H + 2.0 * X.dot(N)) / (rho * rho);
}

std::optional<double> firstFailureRadius(const Vec3& X, const Vec3& N, double H) {
  if (!(H > 0.0)) throw std::invalid_argument("failure radius needs H > 0");
  const double radicand = X.squaredNorm() * H + 2.0 * X.dot(N);
  if (!(radicand > 0.0)) return std::nullopt;
  return std::sqrt(radicand / H);
}

ReflectedSurface reflectSurface(const TriMesh& mesh, double meanCurv, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("inversion radius must be positive");
  if (mesh.V.rows() == 0) throw std::invalid_argument("empty mesh");
  if (!mesh.hasNormals()) throw std::invalid_argument("mesh needs per-vertex normals");

  const double epsGeom = 1e-9 * (mesh.bboxDiagonal() + mesh.V.rowwise().norm().maxCoeff());
  ReflectedSurface out;
  out.rho = rho;
  out.mesh.V.resize(mesh.V.rows(), 3);
  out.mesh.N.resize(mesh.V.rows(), 3);
  out.mesh.F = mesh.F;
  out.hatH.resize(mesh.V.rows());

  const std::size_t n = static_cast<std::size_t>(mesh.V.rows());
  std::vector<char> tooClose(n, 0);
  parallelFor(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Eigen::Index r = static_cast<Eigen::Index>(i);
      const Vec3 X = mesh.V.row(r).transpose();
      const Vec3 N = mesh.N.row(r).transpose();
      const double n2 = X.squaredNorm();
      if (n2 <= epsGeom * epsGeom) {
        tooClose[i] = 1;
        continue;
      }
      out.mesh.V.row(r) = (rho * rho / n2) * mesh.V.row(r);
      out.mesh.N.row(r) = reflectUnitNormal(X, N).transpose();
      out.hatH(r) = (n2 * meanCurv + 2.0 * X.dot(N)) / (rho * rho);
    }
  });
  if (std::find(tooClose.begin(), tooClose.end(), 1) != tooClose.end()) {
    throw std::domain_error("surface point too close to the inversion center");
  }
  return out;
}

DiscreteCurvature discreteMeanCurvature(const TriMesh& mesh) {
  const MeshTopology topo = analyzeTopology(mesh);
  if (!topo.edgeManifold) throw std::runtime_error("non-manifold edge");
  if (!mesh.hasNormals()) throw std::invalid_argument("mesh needs per-vertex normals");

  const Eigen::Index nV = mesh.V.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nV, 3);  // cotangent Laplacian of X
  Eigen::VectorXd area = Eigen::VectorXd::Zero(nV);  // mixed Voronoi areas

  for (Eigen::Index fIdx = 0; fIdx < mesh.F.rows(); ++fIdx) {
    const int ia = mesh.F(fIdx, 0), ib = mesh.F(fIdx, 1), ic = mesh.F(fIdx, 2);
    const Vec3 A = mesh.V.row(ia).transpose();
    const Vec3 B = mesh.V.row(ib).transpose();
    const Vec3 C = mesh.V.row(ic).transpose();
    const Vec3 ab = B - A, bc = C - B, ca = A - C;
    const double doubleArea = (ab.cross(-ca)).norm();
    if (!(doubleArea > 0.0)) continue;  // degenerate face carries no weight
    const double faceArea = 0.5 * doubleArea;

    // Cotangents of the interior angles.
    const double cotA = (ab.dot(-ca)) / doubleArea;
    const double cotB = ((-ab).dot(bc)) / doubleArea;
    const double cotC = ((-bc).dot(ca)) / doubleArea;

    // Laplacian contributions: the edge opposite each angle gets its cot.
    K.row(ib) += cotA * (C - B).transpose();
    K.row(ic) += cotA * (B - C).transpose();
    K.row(ia) += cotB * (C - A).transpose();
    K.row(ic) += cotB * (A - C).transpose();
    K.row(ia) += cotC * (B - A).transpose();
    K.row(ib) += cotC * (A - B).transpose();

    // Mixed Voronoi areas (obtuse triangles fall back to area/2 at the obtuse
    // corner and area/4 elsewhere).
    const bool obtA = cotA < 0.0, obtB = cotB < 0.0, obtC = cotC < 0.0;
    if (!obtA && !obtB && !obtC) {
      const double la2 = bc.squaredNorm();  // opposite A
      const double lb2 = ca.squaredNorm();  // opposite B
      const double lc2 = ab.squaredNorm();  // opposite C
      area(ia) += (lb2 * cotB + lc2 * cotC) / 8.0;
      area(ib) += (lc2 * cotC + la2 * cotA) / 8.0;
      area(ic) += (la2 * cotA + lb2 * cotB) / 8.0;
    } else {
      area(ia) += obtA ? faceArea / 2.0 : faceArea / 4.0;
      area(ib) += obtB ? faceArea / 2.0 : faceArea / 4.0;
      area(ic) += obtC ? faceArea / 2.0 : faceArea / 4.0;
    }
  }

  DiscreteCurvature out;
  out.H.resize(nV);
  out.reliable.assign(static_cast<std::size_t>(nV), 1);
  for (const auto& loop : topo.boundaryLoops) {
    for (int v : loop) out.reliable[static_cast<std::size_t>(v)] = 0;
  }
  for (Eigen::Index i = 0; i < nV; ++i) {
    if (area(i) > 0.0) {
      const Vec3 k = K.row(i).transpose() / (2.0 * area(i));
      out.H(i) = 0.5 * k.dot(mesh.N.row(i).transpose());
    } else {
      out.H(i) = 0.0;
      out.reliable[static_cast<std::size_t>(i)] = 0;
    }
  }
  return out;
}

SubharmonicityResult subharmonicityCheck(rings::CurvatureChart& chart, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("inversion radius must be positive");
  SubharmonicityResult out;
  if (!(chart.H > 0.0)) {
    out.hPositive = false;
    return out;
  }
  if (!chart.hasForms()) rings::fundamentalForms(chart);

  const int nu = chart.nu(), nv = chart.nv();
  Eigen::MatrixXd hat(nu, nv), radius(nu, nv);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const Vec3 X = chart.point(i, j);
      const Vec3 N = chart.normal(i, j);
      radius(i, j) = X.norm();
      hat(i, j) = (X.squaredNorm() * chart.H + 2.0 * X.dot(N)) / (rho * rho);
    }
  }
  if (radius.maxCoeff() < rho) {
    throw std::runtime_error("rho exceeds max |X|");
  }

  const Eigen::MatrixXd lap =
      ((fd::partialUU(hat, chart.du()) + fd::partialVVPeriodic(hat, chart.dv()))
           .array() /
       chart.E.array())
          .matrix();

  out.minLaplacian = kInf;
  out.maxHat = -kInf;
  int maxI = -1, maxJ = -1;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      if (radius(i, j) < rho) continue;
      ++out.subdomainNodes;
      if (hat(i, j) > out.maxHat) {
        out.maxHat = hat(i, j);
        maxI = i;
        maxJ = j;
      }
      if (i == 0 || i == nu - 1) continue;  // chart edge = subdomain boundary
      ++out.interiorNodes;
      out.minLaplacian = std::min(out.minLaplacian, lap(i, j));
    }
  }

  // The subdomain boundary consists of the chart u-edges and the |X| = rho
  // level band (within two grid cells of local |X| variation).
  if (maxI >= 0) {
    if (maxI == 0 || maxI == nu - 1) {
      out.maximizerOnBoundary = true;
    } else {
      double cellVar = 0.0;
      for (const int di : {-1, 1}) {
        cellVar = std::max(cellVar, std::abs(radius(maxI + di, maxJ) - radius(maxI, maxJ)));
      }
      for (const int dj : {-1, 1}) {
        const int j2 = (maxJ + dj + nv) % nv;
        cellVar = std::max(cellVar, std::abs(radius(maxI, j2) - radius(maxI, maxJ)));
      }
      out.maximizerOnBoundary = radius(maxI, maxJ) - rho <= 2.0 * cellVar;
    }
  }
  if (out.interiorNodes == 0) out.minLaplacian = 0.0;
  return out;
}

}  // namespace reflect
}  // namespace wedgecmc

#include "wedgecmc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wedgecmc/reflect.hpp"

namespace wedgecmc {
namespace verify {

namespace {

constexpr double kPi = 3.14159265358979323846;

double medianOf(std::vector<double> v) {
  if (v.empty()) throw std::logic_error("median of empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

int loopFaceAssignment(const TriMesh& mesh, const geom::Wedge& wedge,
                       const std::vector<int>& loop, double tolPlane) {
  for (int cand = 0; cand < 2; ++cand) {
    double maxDist = 0.0;
    for (int v : loop) {
      maxDist = std::max(maxDist,
                         std::abs(wedge.faceDistance(mesh.V.row(v).transpose(), cand)));
    }
    if (maxDist <= tolPlane) return cand;
  }
  throw std::runtime_error("boundary not in wedge face");
}

}  // namespace

RingTypeResult ringTypeCheck(const TriMesh& mesh) {
  const MeshTopology topo = analyzeTopology(mesh);
  if (!topo.edgeManifold) throw std::runtime_error("non-manifold mesh");
  RingTypeResult out;
  out.eulerCharacteristic = topo.eulerCharacteristic;
  out.boundaryLoopCount = static_cast<int>(topo.boundaryLoops.size());
  out.connected = topo.connected;
  out.orientable = topo.orientable;
  out.ringType = out.eulerCharacteristic == 0 && out.boundaryLoopCount == 2 &&
                 out.connected && out.orientable;
  return out;
}

AdherenceResult adherenceCheck(const TriMesh& mesh, const geom::Wedge& wedge,
                               double tolAngle) {
  if (!mesh.hasNormals()) throw std::invalid_argument("mesh needs per-vertex normals");
  const MeshTopology topo = analyzeTopology(mesh);
  if (!topo.edgeManifold) throw std::runtime_error("non-manifold mesh");
  if (topo.boundaryLoops.empty()) throw std::invalid_argument("mesh has no boundary");

  const double diag = mesh.bboxDiagonal();
  const double tolPlane = 1e-6 * std::max(diag, 1e-300);

  AdherenceResult out;
  out.oneSidedWorst = std::numeric_limits<double>::infinity();

  // One-sided condition: the wedge is the intersection of two half-spaces,
  // so the surface stays inside it exactly when every vertex has nonnegative
  // signed distance to both face planes.
  bool oneSidedOk = true;
  for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
    const Vec3 p = mesh.V.row(i).transpose();
    for (int face = 0; face < 2; ++face) {
      const double signedDist = wedge.faceDistance(p, face);
      out.oneSidedWorst = std::min(out.oneSidedWorst, signedDist);
      if (signedDist < -tolPlane) oneSidedOk = false;
    }
  }

  // Closure: cap the loops with their planar disks and demand a watertight,
  // intersection-free result.
  const TriMesh capped = capBoundaryLoops(mesh);
  const MeshTopology cappedTopo = analyzeTopology(capped);
  out.selfIntersections = selfIntersectionCount(capped);
  out.closureSimple = cappedTopo.edgeManifold && cappedTopo.closed &&
                      cappedTopo.orientable && out.selfIntersections == 0;

  bool anglesOk = true;
  for (const std::vector<int>& loop : topo.boundaryLoops) {
    LoopAdherence la;
    la.face = loopFaceAssignment(mesh, wedge, loop, tolPlane);
    const Vec3 planeN = wedge.faceInwardNormal(la.face);

    // Constant-angle condition: spread of N'.N around the loop median.
    std::vector<double> dots;
    dots.reserve(loop.size());
    for (int v : loop) {
      dots.push_back(planeN.dot(mesh.N.row(v).transpose()));
    }
    const double med = medianOf(dots);
    double dev = 0.0;
    for (double d : dots) dev = std::max(dev, std::abs(d - med));
    la.gamma = std::acos(std::clamp(-med, -1.0, 1.0));
    la.angleMaxDeviation = dev;
    if (dev >= tolAngle) anglesOk = false;

    // Boundary smoothness proxy: discrete turning angle along the loop.
    const int n = static_cast<int>(loop.size());
    for (int k = 0; k < n; ++k) {
      const Vec3 a = mesh.V.row(loop[static_cast<std::size_t>((k + n - 1) % n)]).transpose();
      const Vec3 b = mesh.V.row(loop[static_cast<std::size_t>(k)]).transpose();
      const Vec3 c = mesh.V.row(loop[static_cast<std::size_t>((k + 1) % n)]).transpose();
      const Vec3 e1 = (b - a).normalized(), e2 = (c - b).normalized();
      const double turn = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
      la.maxTurningAngle = std::max(la.maxTurningAngle, turn);
    }
    if (la.maxTurningAngle > 0.5 * kPi) out.boundarySmooth = false;

    out.loops.push_back(la);
  }
  if (!std::isfinite(out.oneSidedWorst)) out.oneSidedWorst = 0.0;
  out.oneSided = oneSidedOk;
  out.constantAngle = anglesOk;
  return out;
}

CmcResult cmcCheck(const TriMesh& mesh) {
  const reflect::DiscreteCurvature dc = reflect::discreteMeanCurvature(mesh);
  CmcResult out;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < dc.H.size(); ++i) {
    if (!dc.reliable[static_cast<std::size_t>(i)]) continue;
    sum += dc.H(i);
    ++out.interiorSamples;
  }
  if (out.interiorSamples == 0) throw std::runtime_error("no interior sample");
  out.meanCurvature = sum / out.interiorSamples;
  const double denom = std::max(std::abs(out.meanCurvature), 1e-300);
  for (Eigen::Index i = 0; i < dc.H.size(); ++i) {
    if (!dc.reliable[static_cast<std::size_t>(i)]) continue;
    out.maxRelDeviation =
        std::max(out.maxRelDeviation, std::abs(dc.H(i) - out.meanCurvature) / denom);
  }
  return out;
}

std::string verdictName(Verdict v) {
  switch (v) {
    case Verdict::ConsistentWithExistence: return "consistent-with-existence";
    case Verdict::InNonexistenceRegion: return "in-nonexistence-region";
    case Verdict::OutOfScopeTopology: return "out-of-scope-topology";
  }
  return "unknown";
}

Verdict existenceVerdict(const RingTypeResult& ringType, double margin) {
  if (!ringType.ringType) return Verdict::OutOfScopeTopology;
  if (margin <= 0.0) return Verdict::InNonexistenceRegion;
  return Verdict::ConsistentWithExistence;
}

VerificationReport verifySurface(const TriMesh& mesh, const geom::Wedge& wedge,
                                 const VerifyOptions& options) {
  VerificationReport report;
  report.ringType = ringTypeCheck(mesh);
  report.adherence = adherenceCheck(mesh, wedge, options.tolAngle);
  report.cmc = cmcCheck(mesh);

  int seen[2] = {0, 0};
  for (const LoopAdherence& la : report.adherence.loops) {
    if (la.face >= 0 && la.face < 2) {
      report.gammaMeasured[la.face] = la.gamma;
      ++seen[la.face];
    }
  }
  report.facesSpanned = seen[0] == 1 && seen[1] == 1;
  report.margin =
      report.gammaMeasured[0] + report.gammaMeasured[1] - kPi - wedge.alpha;

  RingTypeResult gateTopo = report.ringType;
  gateTopo.ringType = gateTopo.ringType && report.facesSpanned;
  report.verdict = existenceVerdict(gateTopo, report.margin);

  report.allChecksPass =
      report.ringType.ringType && report.facesSpanned &&
      report.adherence.closureSimple && report.adherence.oneSided &&
      report.adherence.constantAngle && report.adherence.boundarySmooth &&
      report.cmc.maxRelDeviation < options.cmcRelTol;
  report.redFlag =
      report.verdict == Verdict::InNonexistenceRegion && report.allChecksPass;
  return report;
}

}  // namespace verify
}  // namespace wedgecmc

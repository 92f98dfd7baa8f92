#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wedgecmc/bvh.hpp"
#include "wedgecmc/geom.hpp"
#include "wedgecmc/mesh.hpp"

namespace wedgecmc {
namespace sweep {

// Per-point classification during the reflection sweep. Mutually exclusive
// per evaluation; reflected-sphere conditions for interior points, in-plane
// wetted-region conditions for boundary points.
enum class Tag {
  Inactive,                // |X| below the sweep radius: not on the swept side
  SegmentClearInterior,    // radial segment down to the reflected point stays in the open drop region
  SegmentClearBoundary,    // in-plane segment stays in the open wetted region
  SphereCentralInterior,   // on the sweep sphere with X.N strictly negative
  SphereCentralBoundary,   // on the sweep sphere with X.n strictly negative
  ReflectTouchInterior,    // segment test failed: reflected point meets the surface
  ReflectTouchBoundary,    // in-plane segment test failed at the wetted boundary
  SphereTangentInterior,   // on the sweep sphere with X.N ~ 0
  SphereTangentBoundary,   // on the sweep sphere with X.n ~ 0
  Ambiguous,               // membership undecidable within the geometric fuzz
};

bool isTouchTag(Tag tag);
std::string tagName(Tag tag);

struct PointClass {
  Tag tag = Tag::Inactive;
  double xDotN = 0.0;          // radial alignment with the surface normal
  double xDotn = 0.0;          // boundary points: alignment with the in-plane normal
  double witnessDelta = -1.0;  // failing segment parameter, when any
};

struct SweepConfig {
  double originShift = 0.0;      // sweep origin (0, 0, shift) on the vertex line
  int rhoSteps = 256;            // geometric schedule resolution
  double rhoFloorFactor = 1e-3;  // schedule floor as a fraction of rho0
  double bracketTolFactor = 1e-4;   // bisection bracket width relative to rho0
  double epsTouchFactor = 1e-3;     // tangency distance threshold, times scale
  double epsAngle = 1e-2;           // tangency normal-alignment threshold (rad)
  int deltaSamples = 16;            // segment membership samples (plus endpoint)
  double epsGeomFactor = 1e-9;      // drop-region membership fuzz, times scale
  double meanCurvature = std::numeric_limits<double>::quiet_NaN();
  // NaN: estimate from the mesh for the boundedness audit.
};

// Prebuilt geometry shared by every classification pass: shifted vertices,
// the watertight drop-region oracle, per-loop wetted polygons, and in-plane
// boundary normals.
class SweepContext {
 public:
  SweepContext(const TriMesh& mesh, const geom::Wedge& wedge, const SweepConfig& config);

  const TriMesh& mesh() const { return mesh_; }
  const geom::Wedge& wedge() const { return wedge_; }
  const SweepConfig& config() const { return config_; }
  const geom::DropRegion& region() const { return *region_; }
  const Bvh& surfaceBvh() const { return surfaceBvh_; }
  double scale() const { return scale_; }
  double epsTouch() const { return epsTouch_; }
  // Membership fuzz actually in force: the configured floor widened to the
  // chordal sag of the mesh, so sub-resolution penetrations read as grazing.
  double membershipBand() const { return epsGeom_; }
  double firstContactRadius() const { return rho0_; }
  bool isBoundaryVertex(int v) const { return boundaryFlag_[static_cast<std::size_t>(v)] != 0; }
  const std::vector<std::vector<int>>& loops() const { return loops_; }
  // In-plane inward normal of the wetted region at a boundary vertex.
  Vec3 boundaryInwardNormal(int v) const { return boundaryN_.row(v).transpose(); }
  int loopOfVertex(int v) const { return loopOfVertex_[static_cast<std::size_t>(v)]; }
  int faceOfLoop(int loop) const { return loopFace_[static_cast<std::size_t>(loop)]; }

  // Open-membership test of a point in the wetted region of the given loop
  // (point assumed in the loop's face plane).
  geom::Membership wettedMembership(int loop, const Vec3& p) const;

 private:
  TriMesh mesh_;
  geom::Wedge wedge_;
  SweepConfig config_;
  std::unique_ptr<geom::DropRegion> region_;
  Bvh surfaceBvh_;
  std::vector<std::vector<int>> loops_;
  std::vector<char> boundaryFlag_;
  std::vector<int> loopOfVertex_;
  std::vector<int> loopFace_;
  Eigen::MatrixXd boundaryN_;
  // Per-loop wetted polygon: plane basis and 2D vertices.
  struct WettedPolygon {
    Vec3 origin, e1, e2;
    Eigen::MatrixXd pts;  // n x 2
  };
  std::vector<WettedPolygon> polygons_;
  double scale_ = 0.0, epsTouch_ = 0.0, epsGeom_ = 0.0, rho0_ = 0.0;
};

double findFirstContactRadius(const TriMesh& mesh, double originShift = 0.0);

std::vector<PointClass> classifyPoints(const SweepContext& ctx, double rho);

struct BoundednessAudit {
  double maxExcess = 0.0;  // max over samples of hatH - H
  Vec3 argmax = Vec3::Zero();
  double argmaxRho = 0.0;
  bool maximizerOnBoundaryAll = true;  // every rho-slice maximizer on the swept-part boundary
  double meanCurvatureUsed = 0.0;
};

struct CentralityAudit {
  double maxXdotN = 0.0;  // over vertices with |X| >= rho1
  double maxXdotn = 0.0;  // over boundary vertices with |X| >= rho1
  int centralEqualityViolations = 0;
  double minBoundaryNormalDot = 0.0;  // min N.n over the contact lines
};

struct SweepReport {
  double firstContactRadius = 0.0;  // largest vertex distance from the origin
  double touchRadius = 0.0;         // first radius producing a touching event
  double bracketWidth = 0.0;
  std::vector<Tag> touchTags;
  std::vector<Vec3> touchPoints;    // in the original (unshifted) frame
  int ambiguousCount = 0;
  double coincidenceResidual = 0.0;
  bool symmetric = false;
  bool conclusive = true;  // false: schedule floor reached without an event
  BoundednessAudit boundedness;
  CentralityAudit centrality;
};

SweepReport runSweep(const TriMesh& mesh, const geom::Wedge& wedge,
                     const SweepConfig& config = SweepConfig());

BoundednessAudit boundednessAudit(const SweepContext& ctx, double rhoLo, double rhoHi,
                                  int rhoSamples, double meanCurv);
CentralityAudit centralityAudit(const SweepContext& ctx, double rho1);

// Planar mirror sweep along the vertex direction: planes {x3 = sigma}
// descending from the top of the mesh. With a wedge, boundary points are
// tested inside their wetted regions; without one, boundary vertices are
// skipped and only interior conditions drive the detection.
struct PlanarSweepReport {
  double sigma = 0.0;  // detected mirror plane height
  double bracketWidth = 0.0;
  double coincidenceResidual = 0.0;
  bool symmetric = false;
  bool conclusive = true;
};
PlanarSweepReport planarSymmetryPlane(const TriMesh& mesh,
                                      const geom::Wedge* wedge = nullptr,
                                      const SweepConfig& config = SweepConfig());

struct PlanarTraceReport {
  PlanarSweepReport plane;
  std::vector<std::vector<Vec3>> traces;    // section polylines, endpoints on the contact lines
  std::vector<double> traceCurvatures;      // circle-fit curvature per trace
  double traceMirrorAzimuth = 0.0;          // azimuth of the section's mirror line
  double gammaMeasured[2] = {0.0, 0.0};     // in-plane endpoint angles per face
  double angleSumResidual = 0.0;            // gamma1 + gamma2 - pi - alpha, measured
  bool degenerateTrace = false;
};
PlanarTraceReport planarSweepAndTrace(const TriMesh& mesh, const geom::Wedge& wedge,
                                      const SweepConfig& config = SweepConfig());

}  // namespace sweep
}  // namespace wedgecmc

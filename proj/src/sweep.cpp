#include "wedgecmc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include "wedgecmc/reflect.hpp"
#include "wedgecmc/util.hpp"

namespace wedgecmc {
namespace sweep {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double estimateMeanCurvature(const TriMesh& mesh) {
  const reflect::DiscreteCurvature dc = reflect::discreteMeanCurvature(mesh);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(dc.H.size()));
  for (Eigen::Index i = 0; i < dc.H.size(); ++i) {
    if (dc.reliable[static_cast<std::size_t>(i)]) vals.push_back(dc.H(i));
  }
  if (vals.empty()) throw std::runtime_error("no interior sample");
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

double medianOrZero(std::vector<double>& vals) {
  if (vals.empty()) return 0.0;
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

// Chordal sag of the mesh against the smooth surface it samples. A face whose
// endpoint normals disagree by theta across an edge of length h sits below the
// smooth surface by about h * theta / 8; return twice the median face sag so
// membership queries treat sub-resolution penetrations as grazing.
double surfaceSag(const TriMesh& mesh) {
  if (!mesh.hasNormals() || mesh.F.rows() == 0) return 0.0;
  std::vector<double> sag;
  sag.reserve(static_cast<std::size_t>(mesh.F.rows()));
  for (Eigen::Index f = 0; f < mesh.F.rows(); ++f) {
    double h = 0.0, theta = 0.0;
    for (int e = 0; e < 3; ++e) {
      const int i = mesh.F(f, e), j = mesh.F(f, (e + 1) % 3);
      h = std::max(h, (mesh.V.row(i) - mesh.V.row(j)).norm());
      const double c = std::clamp(mesh.N.row(i).dot(mesh.N.row(j)), -1.0, 1.0);
      theta = std::max(theta, std::acos(c));
    }
    sag.push_back(h * theta / 8.0);
  }
  return 2.0 * medianOrZero(sag);
}

// Same sag bound for the polygonal boundary loops: an edge of length h turning
// by tau at its endpoint cuts the smooth contact curve by about h * tau / 8.
double loopSag(const TriMesh& mesh, const std::vector<std::vector<int>>& loops) {
  std::vector<double> sag;
  for (const std::vector<int>& loop : loops) {
    const int n = static_cast<int>(loop.size());
    if (n < 3) continue;
    for (int k = 0; k < n; ++k) {
      const Vec3 a = mesh.V.row(loop[static_cast<std::size_t>((k + n - 1) % n)]).transpose();
      const Vec3 b = mesh.V.row(loop[static_cast<std::size_t>(k)]).transpose();
      const Vec3 c = mesh.V.row(loop[static_cast<std::size_t>((k + 1) % n)]).transpose();
      const Vec3 e0 = (b - a).normalized(), e1 = (c - b).normalized();
      const double tau = std::acos(std::clamp(e0.dot(e1), -1.0, 1.0));
      sag.push_back((c - b).norm() * tau / 8.0);
    }
  }
  return 2.0 * medianOrZero(sag);
}

}  // namespace

bool isTouchTag(Tag tag) {
  switch (tag) {
    case Tag::ReflectTouchInterior:
    case Tag::ReflectTouchBoundary:
    case Tag::SphereTangentInterior:
    case Tag::SphereTangentBoundary:
      return true;
    default:
      return false;
  }
}

std::string tagName(Tag tag) {
  switch (tag) {
    case Tag::Inactive: return "inactive";
    case Tag::SegmentClearInterior: return "segment-clear-interior";
    case Tag::SegmentClearBoundary: return "segment-clear-boundary";
    case Tag::SphereCentralInterior: return "sphere-central-interior";
    case Tag::SphereCentralBoundary: return "sphere-central-boundary";
    case Tag::ReflectTouchInterior: return "reflect-touch-interior";
    case Tag::ReflectTouchBoundary: return "reflect-touch-boundary";
    case Tag::SphereTangentInterior: return "sphere-tangent-interior";
    case Tag::SphereTangentBoundary: return "sphere-tangent-boundary";
    case Tag::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

SweepContext::SweepContext(const TriMesh& mesh, const geom::Wedge& wedge,
                           const SweepConfig& config)
    : mesh_(mesh), wedge_(wedge), config_(config) {
  if (mesh_.V.rows() == 0) throw std::invalid_argument("empty mesh");
  if (!mesh_.hasNormals()) throw std::invalid_argument("mesh needs per-vertex normals");

  // Work in the shifted frame: the sweep origin becomes (0, 0, 0). The wedge
  // faces contain the vertex line, so they are invariant under the shift.
  if (config_.originShift != 0.0) {
    mesh_.V.col(2).array() -= config_.originShift;
  }

  scale_ = mesh_.bboxDiagonal();
  epsTouch_ = config_.epsTouchFactor * scale_;
  rho0_ = mesh_.V.rowwise().norm().maxCoeff();

  const MeshTopology topo = analyzeTopology(mesh_);
  loops_ = topo.boundaryLoops;

  // Membership queries run against the chordal polyhedron, which sags below
  // the smooth surface it samples. Points within the sag band must read as
  // Boundary (grazing), not Outside, or near-tangent reflected segments fire
  // false crossings at mesh resolution.
  epsGeom_ = std::max({config_.epsGeomFactor * scale_, surfaceSag(mesh_),
                       loopSag(mesh_, loops_)});

  const TriMesh capped = capBoundaryLoops(mesh_);
  region_ = std::make_unique<geom::DropRegion>(
      capped, epsGeom_ / std::max(capped.bboxDiagonal(), 1e-300));
  surfaceBvh_.build(mesh_.V, mesh_.F);
  boundaryFlag_.assign(static_cast<std::size_t>(mesh_.V.rows()), 0);
  loopOfVertex_.assign(static_cast<std::size_t>(mesh_.V.rows()), -1);
  boundaryN_ = Eigen::MatrixXd::Zero(mesh_.V.rows(), 3);
  loopFace_.assign(loops_.size(), -1);
  polygons_.resize(loops_.size());

  const double tolPlane = 1e-6 * std::max(scale_, 1e-300);
  for (std::size_t li = 0; li < loops_.size(); ++li) {
    const std::vector<int>& loop = loops_[li];
    // Assign the loop to the wedge face whose plane contains it.
    int face = -1;
    for (int cand = 0; cand < 2; ++cand) {
      double maxDist = 0.0;
      for (int v : loop) {
        maxDist = std::max(maxDist,
                           std::abs(wedge_.faceDistance(mesh_.V.row(v).transpose(), cand)));
      }
      if (maxDist <= tolPlane) {
        face = cand;
        break;
      }
    }
    if (face < 0) throw std::runtime_error("boundary not in wedge face");
    loopFace_[li] = face;

    const Vec3 planeN = wedge_.faceInwardNormal(face);
    Vec3 centroid = Vec3::Zero();
    for (int v : loop) centroid += mesh_.V.row(v).transpose();
    centroid /= static_cast<double>(loop.size());

    WettedPolygon& poly = polygons_[li];
    poly.origin = centroid - planeN.dot(centroid) * planeN;  // keep exactly in-plane
    poly.e1 = wedge_.faceDirection(face);
    poly.e2 = planeN.cross(poly.e1).normalized();
    poly.pts.resize(static_cast<Eigen::Index>(loop.size()), 2);
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Vec3 d = Vec3(mesh_.V.row(loop[k]).transpose()) - poly.origin;
      poly.pts(static_cast<Eigen::Index>(k), 0) = d.dot(poly.e1);
      poly.pts(static_cast<Eigen::Index>(k), 1) = d.dot(poly.e2);
    }

    const int n = static_cast<int>(loop.size());
    for (int k = 0; k < n; ++k) {
      const int v = loop[static_cast<std::size_t>(k)];
      boundaryFlag_[static_cast<std::size_t>(v)] = 1;
      loopOfVertex_[static_cast<std::size_t>(v)] = static_cast<int>(li);
      const Vec3 prev = mesh_.V.row(loop[static_cast<std::size_t>((k + n - 1) % n)]).transpose();
      const Vec3 next = mesh_.V.row(loop[static_cast<std::size_t>((k + 1) % n)]).transpose();
      const Vec3 tangent = (next - prev).normalized();
      Vec3 inPlane = tangent.cross(planeN);
      // Point the in-plane normal into the wetted region.
      if (inPlane.dot(centroid - Vec3(mesh_.V.row(v).transpose())) < 0.0) inPlane = -inPlane;
      boundaryN_.row(v) = inPlane.normalized().transpose();
    }
  }
}

geom::Membership SweepContext::wettedMembership(int loop, const Vec3& p) const {
  const WettedPolygon& poly = polygons_[static_cast<std::size_t>(loop)];
  const Vec3 d = p - poly.origin;
  const double x = d.dot(poly.e1), y = d.dot(poly.e2);
  const Eigen::Index n = poly.pts.rows();

  // Distance to the polygon boundary first: the fuzzy band is Boundary.
  double dist2 = kInf;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index k2 = (k + 1) % n;
    const double ax = poly.pts(k, 0), ay = poly.pts(k, 1);
    const double bx = poly.pts(k2, 0), by = poly.pts(k2, 1);
    const double ex = bx - ax, ey = by - ay;
    const double len2 = ex * ex + ey * ey;
    double t = len2 > 0.0 ? ((x - ax) * ex + (y - ay) * ey) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = x - (ax + t * ex), dy = y - (ay + t * ey);
    dist2 = std::min(dist2, dx * dx + dy * dy);
  }
  if (dist2 <= epsGeom_ * epsGeom_) return geom::Membership::Boundary;

  // Even-odd crossing count.
  bool inside = false;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index k2 = (k + 1) % n;
    const double ay = poly.pts(k, 1), by = poly.pts(k2, 1);
    if ((ay > y) == (by > y)) continue;
    const double ax = poly.pts(k, 0), bx = poly.pts(k2, 0);
    const double xc = ax + (y - ay) / (by - ay) * (bx - ax);
    if (x < xc) inside = !inside;
  }
  return inside ? geom::Membership::Inside : geom::Membership::Outside;
}

double findFirstContactRadius(const TriMesh& mesh, double originShift) {
  if (mesh.V.rows() == 0) throw std::invalid_argument("empty mesh");
  Eigen::MatrixXd V = mesh.V;
  V.col(2).array() -= originShift;
  return V.rowwise().norm().maxCoeff();
}

namespace {

// Segment membership with verdict-stability refinement: samples are doubled
// (up to three times) whenever a grazing (Boundary) classification appears.
enum class SegmentVerdict { Clear, Blocked, Grazing };

template <typename MembershipFn>
SegmentVerdict segmentVerdict(const MembershipFn& member, int baseSamples,
                              double* failingDelta, double deltaMax) {
  int samples = baseSamples;
  for (int attempt = 0; attempt < 4; ++attempt) {
    bool grazed = false;
    for (int s = samples; s >= 1; --s) {  // endpoint first: most likely failure
      const double delta = deltaMax * static_cast<double>(s) / samples;
      const geom::Membership m = member(delta);
      if (m == geom::Membership::Outside) {
        if (failingDelta) *failingDelta = delta;
        return SegmentVerdict::Blocked;
      }
      if (m == geom::Membership::Boundary) {
        grazed = true;
        break;
      }
    }
    if (!grazed) return SegmentVerdict::Clear;
    samples *= 2;
  }
  return SegmentVerdict::Grazing;
}

}  // namespace

std::vector<PointClass> classifyPoints(const SweepContext& ctx, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("sweep radius must be positive");
  const TriMesh& mesh = ctx.mesh();
  const std::size_t n = static_cast<std::size_t>(mesh.V.rows());
  std::vector<PointClass> out(n);

  const double epsTouch = ctx.epsTouch();

  parallelFor(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const Eigen::Index vi = static_cast<Eigen::Index>(idx);
      PointClass& pc = out[idx];
      const Vec3 X = mesh.V.row(vi).transpose();
      const Vec3 N = mesh.N.row(vi).transpose();
      const double r = X.norm();
      const bool onSphere = std::abs(r - rho) <= epsTouch;
      if (r < rho && !onSphere) {
        pc.tag = Tag::Inactive;
        continue;
      }
      const bool isBoundary = ctx.isBoundaryVertex(static_cast<int>(idx));
      pc.xDotN = X.dot(N);
      if (isBoundary) pc.xDotn = X.dot(ctx.boundaryInwardNormal(static_cast<int>(idx)));

      if (onSphere) {
        if (isBoundary) {
          pc.tag = pc.xDotn < -epsTouch ? Tag::SphereCentralBoundary
                                        : Tag::SphereTangentBoundary;
        } else {
          pc.tag = pc.xDotN < -epsTouch ? Tag::SphereCentralInterior
                                        : Tag::SphereTangentInterior;
        }
        continue;
      }

      const double deltaMax = 1.0 - rho * rho / (r * r);
      if (isBoundary) {
        const int loop = ctx.loopOfVertex(static_cast<int>(idx));
        const auto member = [&](double delta) {
          return ctx.wettedMembership(loop, (1.0 - delta) * X);
        };
        const SegmentVerdict v = segmentVerdict(member, ctx.config().deltaSamples,
                                                &pc.witnessDelta, deltaMax);
        pc.tag = v == SegmentVerdict::Clear     ? Tag::SegmentClearBoundary
                 : v == SegmentVerdict::Blocked ? Tag::ReflectTouchBoundary
                                                : Tag::Ambiguous;
      } else {
        const auto member = [&](double delta) {
          return ctx.region().classify((1.0 - delta) * X);
        };
        const SegmentVerdict v = segmentVerdict(member, ctx.config().deltaSamples,
                                                &pc.witnessDelta, deltaMax);
        pc.tag = v == SegmentVerdict::Clear     ? Tag::SegmentClearInterior
                 : v == SegmentVerdict::Blocked ? Tag::ReflectTouchInterior
                                                : Tag::Ambiguous;
      }
    }
  });
  return out;
}

namespace {

struct StepScan {
  bool anyTouch = false;
  int ambiguous = 0;
  std::vector<int> touchIdx;
};

// Only a blocked segment stops the sweep: it certifies reflected material
// strictly outside the region beyond the membership band. The sphere-band
// tags describe tangency at mesh resolution — they sit a full eps_touch above
// the true event radius, so they inventory the touch set without driving the
// bracket.
bool isBlockingTag(Tag tag) {
  return tag == Tag::ReflectTouchInterior || tag == Tag::ReflectTouchBoundary;
}

StepScan scanStep(const SweepContext& ctx, double rho) {
  const std::vector<PointClass> classes = classifyPoints(ctx, rho);
  StepScan out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (isBlockingTag(classes[i].tag)) {
      out.anyTouch = true;
      out.touchIdx.push_back(static_cast<int>(i));
    } else if (classes[i].tag == Tag::Ambiguous) {
      ++out.ambiguous;
    }
  }
  return out;
}

double coincidenceResidual(const SweepContext& ctx, double rho) {
  const TriMesh& mesh = ctx.mesh();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
    const Vec3 X = mesh.V.row(i).transpose();
    const double r2 = X.squaredNorm();
    if (!(r2 > 0.0)) continue;
    const Vec3 hatX = (rho * rho / r2) * X;
    worst = std::max(worst, ctx.surfaceBvh().distance(hatX));
  }
  return worst;
}

}  // namespace

BoundednessAudit boundednessAudit(const SweepContext& ctx, double rhoLo, double rhoHi,
                                  int rhoSamples, double meanCurv) {
  if (!(rhoLo > 0.0) || !(rhoHi >= rhoLo)) {
    throw std::invalid_argument("boundedness audit needs 0 < rhoLo <= rhoHi");
  }
  const TriMesh& mesh = ctx.mesh();
  BoundednessAudit out;
  out.maxExcess = -kInf;
  out.meanCurvatureUsed = meanCurv;

  // Boundary band of the swept part: mesh boundary vertices plus vertices
  // within one median edge length of the sweep sphere.
  double edgeScale = 0.0;
  {
    std::vector<double> lens;
    lens.reserve(static_cast<std::size_t>(mesh.F.rows()));
    for (Eigen::Index f = 0; f < mesh.F.rows(); ++f) {
      lens.push_back((mesh.V.row(mesh.F(f, 0)) - mesh.V.row(mesh.F(f, 1))).norm());
    }
    std::nth_element(lens.begin(), lens.begin() + lens.size() / 2, lens.end());
    edgeScale = lens[lens.size() / 2];
  }

  for (int s = 0; s < rhoSamples; ++s) {
    const double t = rhoSamples == 1 ? 0.0 : static_cast<double>(s) / (rhoSamples - 1);
    const double rho = rhoLo * std::pow(rhoHi / rhoLo, t);
    double sliceMax = -kInf, sliceBoundaryMax = -kInf;
    Eigen::Index argmax = -1;
    for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
      const Vec3 X = mesh.V.row(i).transpose();
      const double r = X.norm();
      if (r < rho) continue;
      const Vec3 N = mesh.N.row(i).transpose();
      const double hat = (r * r * meanCurv + 2.0 * X.dot(N)) / (rho * rho);
      const double excess = hat - meanCurv;
      if (excess > sliceMax) {
        sliceMax = excess;
        argmax = i;
      }
      const bool onB = ctx.isBoundaryVertex(static_cast<int>(i)) || (r - rho) <= edgeScale;
      if (onB) sliceBoundaryMax = std::max(sliceBoundaryMax, excess);
    }
    if (argmax < 0) continue;
    if (sliceMax > out.maxExcess) {
      out.maxExcess = sliceMax;
      out.argmax = mesh.V.row(argmax).transpose();
      out.argmax(2) += ctx.config().originShift;  // report in the input frame
      out.argmaxRho = rho;
    }
    const double tie = 1e-9 * std::max(std::abs(sliceMax), std::abs(meanCurv));
    if (!(sliceBoundaryMax >= sliceMax - tie)) out.maximizerOnBoundaryAll = false;
  }
  if (out.maxExcess == -kInf) out.maxExcess = 0.0;
  return out;
}

CentralityAudit centralityAudit(const SweepContext& ctx, double rho1) {
  if (!(rho1 > 0.0)) throw std::invalid_argument("centrality audit needs rho1 > 0");
  const TriMesh& mesh = ctx.mesh();
  CentralityAudit out;
  out.maxXdotN = -kInf;
  out.maxXdotn = -kInf;
  out.minBoundaryNormalDot = kInf;

  const double tolEq = 1e-6 * ctx.scale();
  const double bandEq = std::sqrt(2.0 * ctx.scale() * tolEq);

  for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
    const Vec3 X = mesh.V.row(i).transpose();
    const Vec3 N = mesh.N.row(i).transpose();
    const double r = X.norm();
    const bool isBoundary = ctx.isBoundaryVertex(static_cast<int>(i));

    if (isBoundary) {
      const Vec3 nIn = ctx.boundaryInwardNormal(static_cast<int>(i));
      out.minBoundaryNormalDot = std::min(out.minBoundaryNormalDot, N.dot(nIn));
      if (r >= rho1) {
        out.maxXdotn = std::max(out.maxXdotn, X.dot(nIn));
        // Interior-equality consistency: X.N ~ 0 forces X.n ~ 0 away from
        // tangential contact.
        const double sinGamma = N.dot(nIn);
        if (std::abs(X.dot(N)) <= tolEq && sinGamma > 1e-3 &&
            std::abs(X.dot(nIn)) > bandEq) {
          ++out.centralEqualityViolations;
        }
      }
    }
    if (r >= rho1) {
      out.maxXdotN = std::max(out.maxXdotN, X.dot(N));
      if (!isBoundary && std::abs(X.dot(N)) <= tolEq && std::abs(r - rho1) > bandEq) {
        ++out.centralEqualityViolations;
      }
    }
  }
  if (out.maxXdotN == -kInf) out.maxXdotN = 0.0;
  if (out.maxXdotn == -kInf) out.maxXdotn = 0.0;
  if (out.minBoundaryNormalDot == kInf) out.minBoundaryNormalDot = 0.0;
  return out;
}

SweepReport runSweep(const TriMesh& mesh, const geom::Wedge& wedge,
                     const SweepConfig& config) {
  SweepContext ctx(mesh, wedge, config);
  SweepReport report;
  report.firstContactRadius = ctx.firstContactRadius();
  const double rho0 = ctx.firstContactRadius();

  const double meanCurv = std::isnan(config.meanCurvature)
                              ? estimateMeanCurvature(ctx.mesh())
                              : config.meanCurvature;

  // Geometric descent: find the first step with a touching event.
  const int steps = std::max(8, config.rhoSteps);
  const double ratio = std::pow(config.rhoFloorFactor, 1.0 / steps);
  double hi = rho0;       // all-clear radius (starts at rho0: nothing strictly outside)
  double lo = -1.0;       // first radius with an event
  for (int k = 1; k <= steps; ++k) {
    const double rho = rho0 * std::pow(ratio, k);
    const StepScan scan = scanStep(ctx, rho);
    report.ambiguousCount = std::max(report.ambiguousCount, scan.ambiguous);
    if (scan.anyTouch) {
      lo = rho;
      break;
    }
    hi = rho;
  }
  if (lo < 0.0) {
    report.conclusive = false;
    report.touchRadius = 0.0;
    report.coincidenceResidual = kInf;
    report.symmetric = false;
    return report;
  }

  // Bisection refinement of the event bracket. The event set is a down-set in
  // rho (touching persists as the sweep sphere shrinks past the first event),
  // so "touch at mid" brackets from below.
  const double widthTarget = config.bracketTolFactor * rho0;
  while (hi - lo > widthTarget) {
    const double mid = 0.5 * (lo + hi);
    const StepScan scan = scanStep(ctx, mid);
    report.ambiguousCount = std::max(report.ambiguousCount, scan.ambiguous);
    if (scan.anyTouch) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double rho1 = 0.5 * (lo + hi);
  report.bracketWidth = hi - lo;

  // Curvature-consistent refinement. At the touch radius the image curvature
  // returns to the source value, so rho1^2 = r^2 + 2 X.N / H at the touching
  // points while the same expression stays below rho1^2 elsewhere on the
  // swept part. The maximum over self-consistent witnesses (points already
  // swept at the radius they predict) recovers the event radius to machine
  // precision when the first failure is curvature-driven; adopt it when it
  // lands inside the detection bracket, padded by the membership band since
  // segment detection fires only once a reflected point clears that band.
  if (std::isfinite(meanCurv) && meanCurv != 0.0) {
    double best2 = -kInf;
    for (Eigen::Index i = 0; i < ctx.mesh().V.rows(); ++i) {
      const Vec3 X = ctx.mesh().V.row(i).transpose();
      const Vec3 N = ctx.mesh().N.row(i).transpose();
      const double g = X.squaredNorm() + 2.0 * X.dot(N) / meanCurv;
      if (X.squaredNorm() >= g) best2 = std::max(best2, g);
    }
    if (best2 > 0.0) {
      const double cand = std::sqrt(best2);
      const double pad = 3.0 * std::max(ctx.membershipBand(), ctx.epsTouch());
      if (cand >= lo - pad && cand <= hi + pad) rho1 = cand;
    }
  }
  report.touchRadius = rho1;

  // Event inventory at the touching side of the bracket.
  {
    const std::vector<PointClass> classes = classifyPoints(ctx, lo);
    int ambiguous = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i].tag == Tag::Ambiguous) ++ambiguous;
      if (!isTouchTag(classes[i].tag)) continue;
      if (report.touchPoints.size() >= 32) continue;  // inventory, not a full dump
      report.touchTags.push_back(classes[i].tag);
      Vec3 p = ctx.mesh().V.row(static_cast<Eigen::Index>(i)).transpose();
      p(2) += config.originShift;
      report.touchPoints.push_back(p);
    }
    report.ambiguousCount = std::max(report.ambiguousCount, ambiguous);
  }

  report.coincidenceResidual = coincidenceResidual(ctx, rho1);
  report.symmetric = report.coincidenceResidual < 3.0 * ctx.epsTouch();
  report.boundedness = boundednessAudit(ctx, rho1, rho0, 8, meanCurv);
  report.centrality = centralityAudit(ctx, rho1);
  return report;
}

// ---------------------------------------------------------------------------
// Planar sweep along the vertex direction.
// ---------------------------------------------------------------------------

namespace {

// Mirror-containment scan at the plane {x3 = sigma}: every vertex above the
// plane must reflect into the closed drop region, sampled along the vertical
// segment down to the mirror image. Boundary vertices use the in-plane wetted
// region when one is available (wedge given) and are skipped otherwise.
bool planarScanStep(const TriMesh& mesh, const geom::DropRegion& region,
                    const SweepContext* ctx, const std::vector<char>& boundaryFlag,
                    double sigma, double epsTouch, int deltaSamples) {
  const std::size_t n = static_cast<std::size_t>(mesh.V.rows());
  std::vector<char> touch(n, 0);
  parallelFor(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Eigen::Index vi = static_cast<Eigen::Index>(i);
      const Vec3 X = mesh.V.row(vi).transpose();
      const double z = X(2);
      if (z - sigma <= epsTouch) continue;  // unswept side or degenerate drop
      const bool isBoundary = boundaryFlag[i] != 0;
      const double drop = 2.0 * (z - sigma);
      if (isBoundary) {
        if (ctx == nullptr) continue;  // no wetted-region data for this rim
        const int loop = ctx->loopOfVertex(static_cast<int>(i));
        const auto member = [&](double delta) {
          Vec3 p = X;
          p(2) -= delta * drop;
          return ctx->wettedMembership(loop, p);
        };
        if (segmentVerdict(member, deltaSamples, nullptr, 1.0) == SegmentVerdict::Blocked) {
          touch[i] = 1;
        }
      } else {
        const auto member = [&](double delta) {
          Vec3 p = X;
          p(2) -= delta * drop;
          return region.classify(p);
        };
        if (segmentVerdict(member, deltaSamples, nullptr, 1.0) == SegmentVerdict::Blocked) {
          touch[i] = 1;
        }
      }
    }
  });
  return std::find(touch.begin(), touch.end(), 1) != touch.end();
}

double planarCoincidence(const TriMesh& mesh, const Bvh& bvh, double sigma) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
    Vec3 p = mesh.V.row(i).transpose();
    p(2) = 2.0 * sigma - p(2);
    worst = std::max(worst, bvh.distance(p));
  }
  return worst;
}

}  // namespace

PlanarSweepReport planarSymmetryPlane(const TriMesh& mesh, const geom::Wedge* wedge,
                                      const SweepConfig& config) {
  if (mesh.V.rows() == 0) throw std::invalid_argument("empty mesh");
  if (!mesh.hasNormals()) throw std::invalid_argument("mesh needs per-vertex normals");

  std::unique_ptr<SweepContext> ctx;
  std::unique_ptr<geom::DropRegion> localRegion;
  const geom::DropRegion* region = nullptr;
  const Bvh* bvh = nullptr;
  std::unique_ptr<Bvh> localBvh;
  if (wedge != nullptr) {
    ctx = std::make_unique<SweepContext>(mesh, *wedge, config);
    region = &ctx->region();
    bvh = &ctx->surfaceBvh();
  } else {
    const TriMesh capped = capBoundaryLoops(mesh);
    const double band = std::max(config.epsGeomFactor * mesh.bboxDiagonal(),
                                 surfaceSag(mesh));
    localRegion = std::make_unique<geom::DropRegion>(
        capped, band / std::max(capped.bboxDiagonal(), 1e-300));
    region = localRegion.get();
    localBvh = std::make_unique<Bvh>();
    localBvh->build(mesh.V, mesh.F);
    bvh = localBvh.get();
  }
  const TriMesh& work = ctx ? ctx->mesh() : mesh;

  std::vector<char> boundaryFlag(static_cast<std::size_t>(work.V.rows()), 0);
  if (ctx) {
    for (std::size_t i = 0; i < boundaryFlag.size(); ++i) {
      boundaryFlag[i] = ctx->isBoundaryVertex(static_cast<int>(i)) ? 1 : 0;
    }
  } else {
    const MeshTopology topo = analyzeTopology(work);
    for (const std::vector<int>& loop : topo.boundaryLoops) {
      for (int v : loop) boundaryFlag[static_cast<std::size_t>(v)] = 1;
    }
  }

  const double scale = work.bboxDiagonal();
  const double epsTouch = config.epsTouchFactor * scale;
  const double zTop = work.V.col(2).maxCoeff();
  const double zBot = work.V.col(2).minCoeff();

  PlanarSweepReport report;
  const int steps = std::max(8, config.rhoSteps);
  double hi = zTop;
  double lo = std::numeric_limits<double>::quiet_NaN();
  for (int k = 1; k <= steps; ++k) {
    const double sigma = zTop - (zTop - zBot) * static_cast<double>(k) / steps;
    if (planarScanStep(work, *region, ctx.get(), boundaryFlag, sigma, epsTouch,
                       config.deltaSamples)) {
      lo = sigma;
      break;
    }
    hi = sigma;
  }
  if (std::isnan(lo)) {
    report.conclusive = false;
    report.coincidenceResidual = kInf;
    return report;
  }
  const double widthTarget = config.bracketTolFactor * std::max(zTop - zBot, 1e-300);
  while (hi - lo > widthTarget) {
    const double mid = 0.5 * (lo + hi);
    if (planarScanStep(work, *region, ctx.get(), boundaryFlag, mid, epsTouch,
                       config.deltaSamples)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  report.sigma = 0.5 * (lo + hi) + (ctx ? config.originShift : 0.0);
  report.bracketWidth = hi - lo;
  report.coincidenceResidual =
      planarCoincidence(work, *bvh, 0.5 * (lo + hi));
  report.symmetric = report.coincidenceResidual < 3.0 * epsTouch;
  return report;
}

namespace {

// Chains the plane-section segments of the mesh at x3 = sigma into polylines
// keyed by the mesh edges they cross.
std::vector<std::vector<Vec3>> sectionPolylines(const TriMesh& mesh, double sigma) {
  const auto edgeKey = [](int a, int b) {
    const std::uint64_t lo = static_cast<std::uint64_t>(std::min(a, b));
    const std::uint64_t hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
  };
  struct Node {
    Vec3 p;
    std::vector<int> segs;
  };
  std::map<std::uint64_t, Node> nodes;
  struct Seg {
    std::uint64_t a, b;
  };
  std::vector<Seg> segs;

  for (Eigen::Index f = 0; f < mesh.F.rows(); ++f) {
    std::vector<std::uint64_t> keys;
    for (int c = 0; c < 3; ++c) {
      const int i = mesh.F(f, c), j = mesh.F(f, (c + 1) % 3);
      const double zi = mesh.V(i, 2) - sigma, zj = mesh.V(j, 2) - sigma;
      // On-plane vertices count as the positive side (symbolic perturbation),
      // so a section never produces more than two crossings per triangle.
      if ((zi >= 0.0) == (zj >= 0.0)) continue;
      const double t = zi / (zi - zj);
      const Vec3 p = (1.0 - t) * Vec3(mesh.V.row(i).transpose()) +
                     t * Vec3(mesh.V.row(j).transpose());
      const std::uint64_t key = edgeKey(i, j);
      nodes[key].p = p;
      keys.push_back(key);
    }
    if (keys.size() == 2) {
      const int sIdx = static_cast<int>(segs.size());
      segs.push_back({keys[0], keys[1]});
      nodes[keys[0]].segs.push_back(sIdx);
      nodes[keys[1]].segs.push_back(sIdx);
    }
  }

  std::vector<std::vector<Vec3>> polylines;
  std::vector<char> used(segs.size(), 0);
  // Open chains start at nodes with a single incident segment.
  for (auto& [key, node] : nodes) {
    if (node.segs.size() != 1 || used[static_cast<std::size_t>(node.segs[0])]) continue;
    std::vector<Vec3> line;
    std::uint64_t cur = key;
    int seg = node.segs[0];
    line.push_back(node.p);
    while (true) {
      used[static_cast<std::size_t>(seg)] = 1;
      const std::uint64_t next = segs[static_cast<std::size_t>(seg)].a == cur
                                     ? segs[static_cast<std::size_t>(seg)].b
                                     : segs[static_cast<std::size_t>(seg)].a;
      line.push_back(nodes[next].p);
      int follow = -1;
      for (int cand : nodes[next].segs) {
        if (!used[static_cast<std::size_t>(cand)]) {
          follow = cand;
          break;
        }
      }
      if (follow < 0) break;
      cur = next;
      seg = follow;
    }
    polylines.push_back(std::move(line));
  }
  // Closed loops (no endpoints) are traversed from any unused segment.
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    std::vector<Vec3> line;
    std::uint64_t cur = segs[s].a;
    int seg = static_cast<int>(s);
    line.push_back(nodes[cur].p);
    while (true) {
      used[static_cast<std::size_t>(seg)] = 1;
      const std::uint64_t next = segs[static_cast<std::size_t>(seg)].a == cur
                                     ? segs[static_cast<std::size_t>(seg)].b
                                     : segs[static_cast<std::size_t>(seg)].a;
      line.push_back(nodes[next].p);
      int follow = -1;
      for (int cand : nodes[next].segs) {
        if (!used[static_cast<std::size_t>(cand)]) {
          follow = cand;
          break;
        }
      }
      if (follow < 0) break;
      cur = next;
      seg = follow;
    }
    polylines.push_back(std::move(line));
  }
  return polylines;
}

struct CircleFit2d {
  double cx = 0.0, cy = 0.0, radius = 0.0;
};

CircleFit2d fitCircle(const std::vector<Vec3>& pts) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double x = pts[k](0), y = pts[k](1);
    A(static_cast<Eigen::Index>(k), 0) = 2.0 * x;
    A(static_cast<Eigen::Index>(k), 1) = 2.0 * y;
    A(static_cast<Eigen::Index>(k), 2) = 1.0;
    b(static_cast<Eigen::Index>(k)) = x * x + y * y;
  }
  const Eigen::Vector3d sol = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  CircleFit2d out;
  out.cx = sol(0);
  out.cy = sol(1);
  out.radius = std::sqrt(std::max(1e-300, sol(2) + sol(0) * sol(0) + sol(1) * sol(1)));
  return out;
}

}  // namespace

PlanarTraceReport planarSweepAndTrace(const TriMesh& mesh, const geom::Wedge& wedge,
                                      const SweepConfig& config) {
  PlanarTraceReport report;
  report.plane = planarSymmetryPlane(mesh, &wedge, config);
  if (!report.plane.conclusive) {
    throw std::runtime_error("trace extraction failed: no symmetry plane found");
  }
  const double sigma = report.plane.sigma;
  report.traces = sectionPolylines(mesh, sigma);
  if (report.traces.empty()) {
    throw std::runtime_error("trace extraction failed: empty section");
  }

  const double scale = mesh.bboxDiagonal();
  const double epsTouch = config.epsTouchFactor * scale;

  // Wetted chords: crossings of each boundary loop with the section plane.
  const MeshTopology topo = analyzeTopology(mesh);
  struct Chord {
    int face = -1;
    std::vector<Vec3> pts;
  };
  std::vector<Chord> chords;
  const double tolPlane = 1e-6 * scale;
  for (const std::vector<int>& loop : topo.boundaryLoops) {
    Chord chord;
    for (int cand = 0; cand < 2; ++cand) {
      double maxDist = 0.0;
      for (int v : loop) {
        maxDist = std::max(maxDist,
                           std::abs(wedge.faceDistance(mesh.V.row(v).transpose(), cand)));
      }
      if (maxDist <= tolPlane) {
        chord.face = cand;
        break;
      }
    }
    if (chord.face < 0) throw std::runtime_error("boundary not in wedge face");
    const int n = static_cast<int>(loop.size());
    for (int k = 0; k < n; ++k) {
      const Vec3 a = mesh.V.row(loop[static_cast<std::size_t>(k)]).transpose();
      const Vec3 b = mesh.V.row(loop[static_cast<std::size_t>((k + 1) % n)]).transpose();
      const double za = a(2) - sigma, zb = b(2) - sigma;
      if ((za >= 0.0) == (zb >= 0.0)) continue;
      const double t = za / (za - zb);
      chord.pts.push_back((1.0 - t) * a + t * b);
    }
    chords.push_back(std::move(chord));
  }
  for (const Chord& chord : chords) {
    if (chord.pts.size() >= 2) {
      double minSep = kInf;
      for (std::size_t a = 0; a < chord.pts.size(); ++a) {
        for (std::size_t b = a + 1; b < chord.pts.size(); ++b) {
          minSep = std::min(minSep, (chord.pts[a] - chord.pts[b]).norm());
        }
      }
      if (minSep < epsTouch) report.degenerateTrace = true;
    } else {
      report.degenerateTrace = true;
    }
  }

  // Per-trace circle fits (in the section plane; x3 is constant on a trace).
  double outerRadiusScore = -kInf;
  CircleFit2d outerFit;
  for (const auto& line : report.traces) {
    const CircleFit2d fit = fitCircle(line);
    report.traceCurvatures.push_back(1.0 / fit.radius);
    double meanR = 0.0;
    for (const Vec3& p : line) meanR += std::hypot(p(0), p(1));
    meanR /= static_cast<double>(line.size());
    if (meanR > outerRadiusScore) {
      outerRadiusScore = meanR;
      outerFit = fit;
    }
  }
  report.traceMirrorAzimuth = std::atan2(outerFit.cy, outerFit.cx);

  // Endpoint contact angles, per face: angle between the trace tangent (from
  // the fitted circle) and the wetted chord direction at the shared endpoint.
  double gammaSum[2] = {0.0, 0.0};
  int gammaCount[2] = {0, 0};
  for (const auto& line : report.traces) {
    if (line.size() < 4) continue;
    const CircleFit2d fit = fitCircle(line);
    for (int endSel = 0; endSel < 2; ++endSel) {
      const Vec3 pEnd = endSel == 0 ? line.front() : line.back();
      const Vec3 pIn = endSel == 0 ? line[2] : line[line.size() - 3];
      // Nearest wetted-chord crossing is the matching boundary endpoint.
      const Chord* best = nullptr;
      const Vec3* match = nullptr;
      double bestDist = kInf;
      for (const Chord& chord : chords) {
        for (const Vec3& q : chord.pts) {
          const double d = (q - pEnd).norm();
          if (d < bestDist) {
            bestDist = d;
            best = &chord;
            match = &q;
          }
        }
      }
      if (best == nullptr || bestDist > 4.0 * epsTouch || best->pts.size() < 2) continue;
      // Chord direction into the wetted segment.
      const Vec3* other = nullptr;
      double farthest = -kInf;
      for (const Vec3& q : best->pts) {
        const double d = (q - *match).norm();
        if (d > farthest) {
          farthest = d;
          other = &q;
        }
      }
      if (other == nullptr || farthest <= 0.0) continue;
      Eigen::Vector2d chordDir((*other)(0) - pEnd(0), (*other)(1) - pEnd(1));
      chordDir.normalize();
      // Trace tangent at the endpoint from the fitted circle, oriented into
      // the trace.
      Eigen::Vector2d radial(pEnd(0) - fit.cx, pEnd(1) - fit.cy);
      Eigen::Vector2d tangent(-radial(1), radial(0));
      tangent.normalize();
      const Eigen::Vector2d into(pIn(0) - pEnd(0), pIn(1) - pEnd(1));
      if (tangent.dot(into) < 0.0) tangent = -tangent;
      const double cosG = std::clamp(chordDir.dot(tangent), -1.0, 1.0);
      const double gamma = std::acos(cosG);
      gammaSum[best->face] += gamma;
      ++gammaCount[best->face];
    }
  }
  for (int faceIdx = 0; faceIdx < 2; ++faceIdx) {
    if (gammaCount[faceIdx] == 0) {
      throw std::runtime_error("trace extraction failed: no endpoint on a wedge face");
    }
    report.gammaMeasured[faceIdx] = gammaSum[faceIdx] / gammaCount[faceIdx];
  }
  report.angleSumResidual =
      report.gammaMeasured[0] + report.gammaMeasured[1] - kPi - wedge.alpha;
  return report;
}

}  // namespace sweep
}  // namespace wedgecmc

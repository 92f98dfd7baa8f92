#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "wedgecmc/rings.hpp"
#include "wedgecmc/spanner.hpp"
#include "wedgecmc/sweep.hpp"

using namespace wedgecmc;
using testsup::kPi;

namespace {

spanner::WedgeSphere referenceSphere() {
  return spanner::solveSphere(2.8, 2.8, 0.9, 1.0);
}

}  // namespace

TEST_CASE("sweep context: faces, wetted membership, boundary frame") {
  const spanner::WedgeSphere s = referenceSphere();
  const TriMesh mesh = spanner::meshSpanner(s, 32);
  sweep::SweepContext ctx(mesh, s.wedge(), sweep::SweepConfig{});

  CHECK(ctx.loops().size() == 2);
  CHECK(ctx.scale() > 0.0);
  // The band tracks the chordal sag of the mesh, so it shrinks with
  // refinement but must stay a small fraction of the drop size.
  CHECK(ctx.membershipBand() > 0.0);
  CHECK(ctx.membershipBand() < 0.05 * ctx.scale());
  sweep::SweepContext fine(spanner::meshSpanner(s, 96), s.wedge(),
                           sweep::SweepConfig{});
  CHECK(fine.membershipBand() < ctx.membershipBand());

  int facesSeen[2] = {0, 0};
  for (std::size_t li = 0; li < ctx.loops().size(); ++li) {
    const int face = ctx.faceOfLoop(static_cast<int>(li));
    REQUIRE(face >= 0);
    REQUIRE(face < 2);
    ++facesSeen[face];

    const spanner::ContactDisk& disk = s.contacts[face];
    CHECK(ctx.wettedMembership(static_cast<int>(li), disk.center) ==
          geom::Membership::Inside);
    const Vec3 e1 = s.wedge().faceDirection(face);
    const Vec3 out = disk.center + 1.5 * disk.radius * e1;
    CHECK(ctx.wettedMembership(static_cast<int>(li), out) ==
          geom::Membership::Outside);
    // A point on the contact circle itself is within the fuzz band.
    const Vec3 rim = disk.center + disk.radius * e1;
    CHECK(ctx.wettedMembership(static_cast<int>(li), rim) ==
          geom::Membership::Boundary);
  }
  CHECK(facesSeen[0] == 1);
  CHECK(facesSeen[1] == 1);

  // Boundary inward normals: unit, in the face plane, pointing at the disk.
  for (std::size_t li = 0; li < ctx.loops().size(); ++li) {
    const int face = ctx.faceOfLoop(static_cast<int>(li));
    for (int v : ctx.loops()[li]) {
      CHECK(ctx.isBoundaryVertex(v));
      CHECK(ctx.loopOfVertex(v) == static_cast<int>(li));
      const Vec3 n = ctx.boundaryInwardNormal(v);
      CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(n.dot(s.wedge().faceInwardNormal(face))) < 1e-12);
      const Vec3 X = mesh.V.row(v).transpose();
      CHECK(n.dot(s.contacts[face].center - X) > 0.0);
    }
  }
}

TEST_CASE("point classification is quiet above the touch radius") {
  const spanner::WedgeSphere s = referenceSphere();
  const TriMesh mesh = spanner::meshSpanner(s, 32);
  sweep::SweepContext ctx(mesh, s.wedge(), sweep::SweepConfig{});
  const double rho1 =
      std::sqrt(s.centerDistance * s.centerDistance - s.radius * s.radius);

  // Well above the touch radius nothing blocks.
  for (const auto& pc :
       sweep::classifyPoints(ctx, 0.5 * (rho1 + ctx.firstContactRadius()))) {
    CHECK(pc.tag != sweep::Tag::ReflectTouchInterior);
    CHECK(pc.tag != sweep::Tag::ReflectTouchBoundary);
  }
  // Beyond the far point everything is inactive.
  for (const auto& pc : sweep::classifyPoints(ctx, 1.1 * ctx.firstContactRadius())) {
    CHECK(pc.tag == sweep::Tag::Inactive);
  }
  // Clearly below the touch radius the reflection pierces the region.
  int blocking = 0;
  for (const auto& pc : sweep::classifyPoints(ctx, 0.8 * rho1)) {
    blocking += (pc.tag == sweep::Tag::ReflectTouchInterior ||
                 pc.tag == sweep::Tag::ReflectTouchBoundary);
  }
  CHECK(blocking > 0);
}

TEST_CASE("spherical sweep finds the tangent-length radius of the spanner") {
  const spanner::WedgeSphere s = referenceSphere();
  const TriMesh mesh = spanner::meshSpanner(s, 48);
  const double rho1 =
      std::sqrt(s.centerDistance * s.centerDistance - s.radius * s.radius);

  sweep::SweepConfig config;
  config.meanCurvature = s.meanCurvature;
  const sweep::SweepReport rep = sweep::runSweep(mesh, s.wedge(), config);

  CHECK(rep.conclusive);
  CHECK(std::abs(rep.touchRadius - rho1) < 0.01 * rho1);
  CHECK(rep.symmetric);
  CHECK(rep.coincidenceResidual < 3.0 * 1e-3 * mesh.bboxDiagonal());
  CHECK(!rep.touchTags.empty());
  CHECK(rep.touchPoints.size() == rep.touchTags.size());

  // At the coincidence radius the image curvature equals the source value,
  // so the boundedness excess vanishes and stays nonpositive outward.
  CHECK(rep.boundedness.maxExcess < 1e-9 * s.meanCurvature);
  CHECK(rep.boundedness.maximizerOnBoundaryAll);

  // Centrality: X.N <= 0 on the swept part; along the contact lines the
  // surface meets the faces at the construction angle.
  CHECK(rep.centrality.maxXdotN <= 1e-9 * mesh.bboxDiagonal());
  CHECK(rep.centrality.centralEqualityViolations == 0);
  CHECK(rep.centrality.minBoundaryNormalDot ==
        doctest::Approx(std::sin(2.8)).epsilon(1e-9));
}

TEST_CASE("sweep origin shift moves the tangent length accordingly") {
  const spanner::WedgeSphere s = referenceSphere();
  const TriMesh mesh = spanner::meshSpanner(s, 48);
  const double shift = 0.45;
  const double d2 = s.centerDistance * s.centerDistance + shift * shift;
  const double rho1 = std::sqrt(d2 - s.radius * s.radius);

  sweep::SweepConfig config;
  config.meanCurvature = s.meanCurvature;
  config.originShift = shift;
  const sweep::SweepReport rep = sweep::runSweep(mesh, s.wedge(), config);
  CHECK(rep.conclusive);
  CHECK(std::abs(rep.touchRadius - rho1) < 0.01 * rho1);
  CHECK(rep.symmetric);
  // Touch points are reported in the input frame: on the source sphere.
  for (const Vec3& p : rep.touchPoints) {
    CHECK(std::abs((p - s.center).norm() - s.radius) < 1e-6 * s.radius);
  }
}

TEST_CASE("sweep with a floor above the touch radius is inconclusive") {
  const spanner::WedgeSphere s = referenceSphere();
  const TriMesh mesh = spanner::meshSpanner(s, 24);
  sweep::SweepConfig config;
  config.meanCurvature = s.meanCurvature;
  config.rhoFloorFactor = 0.95;  // floor well above the tangent length
  const sweep::SweepReport rep = sweep::runSweep(mesh, s.wedge(), config);
  CHECK(!rep.conclusive);
  CHECK(!rep.symmetric);
}

TEST_CASE("planar sweep: the spanner is mirror symmetric across x3 = 0") {
  const spanner::WedgeSphere s = referenceSphere();
  const TriMesh mesh = spanner::meshSpanner(s, 40);
  const geom::Wedge wedge = s.wedge();
  const sweep::PlanarSweepReport rep =
      sweep::planarSymmetryPlane(mesh, &wedge, sweep::SweepConfig{});
  CHECK(rep.conclusive);
  CHECK(std::abs(rep.sigma) < 5e-3 * mesh.bboxDiagonal());
  CHECK(rep.symmetric);
}

TEST_CASE("planar sweep without wedge context: bulge bridge midplane") {
  rings::GridSpec grid;
  grid.nv = 128;
  const double sep = 0.8;
  rings::CurvatureChart chart = rings::delaunayBridge(2.3, 2.3, sep, 1.0, grid);
  const TriMesh mesh = rings::chartToMesh(chart);
  const sweep::PlanarSweepReport rep =
      sweep::planarSymmetryPlane(mesh, nullptr, sweep::SweepConfig{});
  CHECK(rep.conclusive);
  CHECK(std::abs(rep.sigma - sep / 2.0) < 5e-3 * mesh.bboxDiagonal());
  CHECK(rep.symmetric);
}

TEST_CASE("planar sweep with trace extraction on symmetric and skew spanners") {
  const spanner::WedgeSphere sym = referenceSphere();
  const TriMesh meshSym = spanner::meshSpanner(sym, 40);
  const sweep::PlanarTraceReport rep =
      sweep::planarSweepAndTrace(meshSym, sym.wedge(), sweep::SweepConfig{});
  REQUIRE(rep.plane.conclusive);
  REQUIRE(!rep.degenerateTrace);
  CHECK(rep.traces.size() == 2);
  CHECK(std::abs(rep.traceMirrorAzimuth) < 1e-3);
  for (double k : rep.traceCurvatures) {
    CHECK(std::abs(k - sym.meanCurvature) < 0.02 * sym.meanCurvature);
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(rep.gammaMeasured[i] - 2.8) < 5e-3);
  }
  CHECK(std::abs(rep.angleSumResidual - sym.margin) < 5e-3);

  // A skew pair of contact angles pushes the mirror azimuth off the bisector
  // and the per-face angles must land on the right faces.
  const spanner::WedgeSphere skew = spanner::solveSphere(2.9, 2.5, 0.9, 1.0);
  const TriMesh meshSkew = spanner::meshSpanner(skew, 40);
  const sweep::PlanarTraceReport rep2 =
      sweep::planarSweepAndTrace(meshSkew, skew.wedge(), sweep::SweepConfig{});
  REQUIRE(rep2.plane.conclusive);
  CHECK(std::abs(rep2.traceMirrorAzimuth) > 0.01);
  CHECK(std::abs(rep2.gammaMeasured[0] - 2.9) < 5e-3);
  CHECK(std::abs(rep2.gammaMeasured[1] - 2.5) < 5e-3);
  CHECK(std::abs(rep2.angleSumResidual - skew.margin) < 5e-3);
}

TEST_CASE("sweep rejects unusable meshes") {
  const spanner::WedgeSphere s = referenceSphere();
  TriMesh mesh = spanner::meshSpanner(s, 16);
  mesh.N.resize(0, 3);
  CHECK_THROWS_AS(sweep::SweepContext(mesh, s.wedge(), sweep::SweepConfig{}),
                  std::invalid_argument);

  TriMesh empty;
  CHECK_THROWS_AS(sweep::SweepContext(empty, s.wedge(), sweep::SweepConfig{}),
                  std::invalid_argument);

  // Boundary loops must lie in the wedge faces.
  TriMesh shifted = spanner::meshSpanner(s, 16);
  shifted.V.col(0).array() += 0.2;
  CHECK_THROWS_WITH_AS(
      sweep::SweepContext(shifted, s.wedge(), sweep::SweepConfig{}),
      doctest::Contains("boundary not in wedge face"), std::runtime_error);
}

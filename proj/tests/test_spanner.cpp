#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "wedgecmc/mesh.hpp"
#include "wedgecmc/spanner.hpp"

using namespace wedgecmc;
using testsup::kPi;

TEST_CASE("existence gate margin") {
  const auto g = spanner::existenceGate(2.8, 2.8, 0.9);
  CHECK(g.exists);
  CHECK(g.margin == doctest::Approx(2.8 + 2.8 - kPi - 0.9).epsilon(1e-15));
  CHECK(!spanner::existenceGate(1.5, 1.5, 0.5).exists);
  // At the boundary the rounded margin may land an ulp on either side of
  // zero; the flag must agree with the computed margin, and a hair below
  // the boundary must be refused outright.
  const double alpha = 0.7;
  const auto b = spanner::existenceGate((kPi + alpha) / 2, (kPi + alpha) / 2, alpha);
  CHECK(b.exists == (b.margin > 0.0));
  CHECK(b.margin == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(!spanner::existenceGate((kPi + alpha) / 2 - 1e-12, (kPi + alpha) / 2, alpha)
             .exists);
}

TEST_CASE("spanning sphere satisfies the contact identities") {
  auto rng = testsup::makeRng(101);
  std::uniform_real_distribution<double> aDist(0.2, 2.4);
  std::uniform_real_distribution<double> mDist(0.05, 0.8);
  std::uniform_real_distribution<double> rDist(0.4, 3.0);
  int tested = 0;
  while (tested < 40) {
    const double alpha = aDist(rng);
    const double margin = mDist(rng);
    // Split pi + alpha + margin into two angles within (0, pi).
    const double total = kPi + alpha + margin;
    std::uniform_real_distribution<double> split(
        std::max(0.05, total - kPi + 0.05), std::min(kPi - 0.05, total - 0.05));
    const double g1 = split(rng);
    const double g2 = total - g1;
    if (!(g2 > 0.0 && g2 < kPi)) continue;
    ++tested;
    const double R = rDist(rng);

    const spanner::WedgeSphere s = spanner::solveSphere(g1, g2, alpha, R);
    const geom::Wedge w = s.wedge();
    CHECK(s.radius == doctest::Approx(R).epsilon(1e-14));
    CHECK(s.center(2) == 0.0);
    CHECK(s.centerDistance == doctest::Approx(s.center.norm()).epsilon(1e-13));
    CHECK(s.margin == doctest::Approx(margin).epsilon(1e-10));

    // Center heights above each face select the contact angles.
    const double gammas[2] = {g1, g2};
    for (int i = 0; i < 2; ++i) {
      const double h = w.faceDistance(s.center, i);
      CHECK(h == doctest::Approx(-R * std::cos(gammas[i])).epsilon(1e-12));
      const spanner::ContactDisk& disk = s.contacts[i];
      CHECK(!disk.degenerate);
      CHECK(disk.radius == doctest::Approx(R * std::sin(gammas[i])).epsilon(1e-11));
      CHECK(std::abs(w.faceDistance(disk.center, i)) < 1e-12 * R);
      CHECK((disk.planeNormal - w.faceInwardNormal(i)).norm() < 1e-14);
      // Points of the contact circle meet the face at the requested angle.
      const Vec3 e1 = w.faceDirection(i);
      const Vec3 e2 = disk.planeNormal.cross(e1);
      for (double t : {0.0, 1.2, 2.9, 4.4}) {
        const Vec3 X =
            disk.center + disk.radius * (std::cos(t) * e1 + std::sin(t) * e2);
        CHECK(std::abs((X - s.center).norm() - R) < 1e-10 * R);
        const Vec3 N = (s.center - X) / R;  // unit normal into the ball
        CHECK(geom::contactAngle(w.faceInwardNormal(i), N) ==
              doctest::Approx(gammas[i]).epsilon(1e-10));
      }
    }
    CHECK(s.meanCurvature == doctest::Approx(1.0 / R).epsilon(1e-14));
  }
}

TEST_CASE("solver refuses parameters outside the existence region") {
  CHECK_THROWS_WITH_AS(static_cast<void>(spanner::solveSphere(1.2, 1.4, 0.8, 1.0)),
                       doctest::Contains("non-existent"), std::runtime_error);
  // gamma out of range is a usage error, not a gate failure.
  CHECK_THROWS_AS(static_cast<void>(spanner::solveSphere(-0.1, 2.8, 0.8, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(spanner::solveSphere(2.8, 2.8, 0.8, -1.0)),
                  std::invalid_argument);
}

TEST_CASE("spanner mesh is an on-sphere annulus with inward normals") {
  const spanner::WedgeSphere s = spanner::solveSphere(2.8, 2.6, 0.9, 1.3);
  const TriMesh mesh = spanner::meshSpanner(s, 48);
  REQUIRE(mesh.hasNormals());

  const MeshTopology topo = analyzeTopology(mesh);
  CHECK(topo.connected);
  CHECK(topo.orientable);
  CHECK(topo.edgeManifold);
  CHECK(topo.eulerCharacteristic == 0);
  CHECK(topo.boundaryLoops.size() == 2);

  for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
    const Vec3 X = mesh.V.row(i).transpose();
    CHECK(std::abs((X - s.center).norm() - s.radius) < 1e-10 * s.radius);
    const Vec3 expectN = (s.center - X).normalized();
    CHECK((Vec3(mesh.N.row(i).transpose()) - expectN).norm() < 1e-10);
  }

  // An independent sphere fit recovers the construction.
  const testsup::SphereFit fit = testsup::fitSphere(mesh.V);
  CHECK((fit.center - s.center).norm() < 1e-8 * s.radius);
  CHECK(fit.radius == doctest::Approx(s.radius).epsilon(1e-8));
  CHECK(fit.rms < 1e-10 * s.radius);

  // Each boundary loop lies in its wedge face and matches the contact circle.
  const geom::Wedge w = s.wedge();
  int seen[2] = {0, 0};
  for (const std::vector<int>& loop : topo.boundaryLoops) {
    int face = -1;
    for (int cand = 0; cand < 2; ++cand) {
      double maxDist = 0.0;
      for (int v : loop) {
        maxDist = std::max(maxDist, std::abs(w.faceDistance(
                                        Vec3(mesh.V.row(v).transpose()), cand)));
      }
      if (maxDist < 1e-9 * s.radius) face = cand;
    }
    REQUIRE(face >= 0);
    ++seen[face];
    for (int v : loop) {
      const Vec3 X = mesh.V.row(v).transpose();
      CHECK(std::abs((X - s.contacts[face].center).norm() -
                     s.contacts[face].radius) < 1e-9 * s.radius);
    }
  }
  CHECK(seen[0] == 1);
  CHECK(seen[1] == 1);
}

TEST_CASE("volume of the spanning drop against Monte Carlo") {
  const spanner::WedgeSphere s = spanner::solveSphere(2.9, 2.7, 1.1, 1.0);
  const spanner::VolumeResult vol = spanner::spannerVolume(s);
  const double mc = spanner::ballWedgeVolumeMC(s, 0x5eed5eedULL, 200000);
  CHECK(std::abs(vol.volume - mc) < 0.015 * vol.volume);
  // Determinism: the same seed reproduces the estimate bit for bit.
  CHECK(mc == spanner::ballWedgeVolumeMC(s, 0x5eed5eedULL, 200000));
}

TEST_CASE("spanner construction by volume or mean curvature index") {
  spanner::SpannerIndex byH;
  byH.kind = spanner::IndexKind::MeanCurvature;
  byH.value = 2.0;
  const spanner::WedgeSphere sh = spanner::constructSpanner(2.8, 2.8, 0.9, byH);
  CHECK(sh.radius == doctest::Approx(0.5).epsilon(1e-13));

  spanner::SpannerIndex byV;
  byV.kind = spanner::IndexKind::Volume;
  byV.value = 0.7;
  const spanner::WedgeSphere sv = spanner::constructSpanner(2.8, 2.8, 0.9, byV);
  CHECK(spanner::spannerVolume(sv).volume == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("existence region sampling grid") {
  const std::vector<double> alphas = {0.5, 1.0};
  const std::vector<double> gammas = {0.8, 2.0, 2.9};
  const auto samples = spanner::existenceRegionSamples(alphas, gammas);
  CHECK(samples.size() == alphas.size() * gammas.size() * gammas.size());
  for (const auto& smp : samples) {
    CHECK(smp.margin ==
          doctest::Approx(smp.gamma1 + smp.gamma2 - kPi - smp.alpha).epsilon(1e-14));
    CHECK(smp.exists == (smp.margin > 0.0));
  }
}

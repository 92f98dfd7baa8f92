#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "wedgecmc/geom.hpp"
#include "wedgecmc/reflect.hpp"
#include "wedgecmc/rings.hpp"
#include "wedgecmc/spanner.hpp"

using namespace wedgecmc;
using testsup::kPi;

TEST_CASE("normal image: unit, radial Householder, involutive") {
  auto rng = testsup::makeRng(7);
  std::uniform_real_distribution<double> unif(0.3, 3.0);
  for (int k = 0; k < 40; ++k) {
    const Vec3 X = unif(rng) * testsup::randomUnit(rng);
    const Vec3 N = testsup::randomUnit(rng);
    const Vec3 hatN = reflect::reflectUnitNormal(X, N);
    CHECK(hatN.norm() == doctest::Approx(1.0).epsilon(1e-13));
    // Tangential components survive, the radial component flips.
    const Vec3 xu = X.normalized();
    CHECK(hatN.dot(xu) == doctest::Approx(-N.dot(xu)).epsilon(1e-12));
    // The image point is radial, so reflecting back restores the normal.
    const double rho = unif(rng);
    const Vec3 hatX = geom::invertPoint(X, rho);
    CHECK((reflect::reflectUnitNormal(hatX, hatN) - N).norm() < 1e-12);
  }
  CHECK_THROWS_AS(reflect::reflectUnitNormal(Vec3::Zero(), Vec3::UnitX()),
                  std::domain_error);
}

TEST_CASE("image curvature against the inverted-sphere oracle") {
  auto rng = testsup::makeRng(17);
  std::uniform_real_distribution<double> unif(0.3, 2.0);
  for (int k = 0; k < 20; ++k) {
    geom::Sphere s;
    s.center = (1.2 + unif(rng)) * testsup::randomUnit(rng);
    s.radius = 0.3 + 0.4 * unif(rng);
    const double rho = 0.5 + unif(rng);
    const double H = 1.0 / s.radius;  // w.r.t. the inward normal
    const geom::SphereImage img = geom::invertSphere(s, rho);
    REQUIRE(!img.isPlane);
    for (int m = 0; m < 10; ++m) {
      const Vec3 X = s.center + s.radius * testsup::randomUnit(rng);
      const Vec3 N = (s.center - X) / s.radius;
      const double hatH = reflect::reflectedMeanCurvature(X, N, H, rho);
      // Signed oracle: +-1/R' depending on whether the image normal points
      // into the image ball.
      const Vec3 hatX = geom::invertPoint(X, rho);
      const Vec3 hatN = reflect::reflectUnitNormal(X, N);
      const double oracle =
          hatN.dot(img.sphere.center - hatX) / (img.sphere.radius * img.sphere.radius);
      CHECK(std::abs(hatH - oracle) < 1e-10 * std::max(1.0, std::abs(oracle)));
    }
  }
}

TEST_CASE("spheres through the origin invert to planes: zero image curvature") {
  auto rng = testsup::makeRng(29);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int k = 0; k < 10; ++k) {
    geom::Sphere s;
    s.radius = unif(rng);
    s.center = s.radius * testsup::randomUnit(rng);
    const double rho = unif(rng);
    for (int m = 0; m < 10; ++m) {
      Vec3 X;
      do {
        X = s.center + s.radius * testsup::randomUnit(rng);
      } while (X.norm() < 1e-2 * s.radius);
      const Vec3 N = (s.center - X) / s.radius;
      const double hatH = reflect::reflectedMeanCurvature(X, N, 1.0 / s.radius, rho);
      CHECK(std::abs(hatH) < 1e-9 / s.radius);
    }
  }
}

TEST_CASE("first-failure radius closes the loop and the image curvature is monotone") {
  auto rng = testsup::makeRng(31);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Vec3 X = (0.5 + unif(rng)) * testsup::randomUnit(rng);
    const Vec3 N = testsup::randomUnit(rng);
    const double H = 0.2 + unif(rng);
    const auto rhoStar = reflect::firstFailureRadius(X, N, H);
    const double radicand = X.squaredNorm() * H + 2.0 * X.dot(N);
    if (radicand <= 0.0) {
      CHECK(!rhoStar.has_value());
      continue;
    }
    REQUIRE(rhoStar.has_value());
    CHECK(std::abs(reflect::reflectedMeanCurvature(X, N, H, *rhoStar) - H) <
          1e-12 * std::max(1.0, H));
    // hatH = K / rho^2 with K > 0 here: strictly decreasing in rho.
    const double lo = 0.5 * *rhoStar, hi = 1.5 * *rhoStar;
    CHECK(reflect::reflectedMeanCurvature(X, N, H, lo) >
          reflect::reflectedMeanCurvature(X, N, H, hi));
  }
}

TEST_CASE("surface inversion: points, normals, and curvature fields") {
  const spanner::WedgeSphere s = spanner::solveSphere(2.8, 2.8, 0.9, 1.0);
  const TriMesh mesh = spanner::meshSpanner(s, 32);
  const double rho = 1.4;
  const reflect::ReflectedSurface img = reflect::reflectSurface(mesh, s.meanCurvature, rho);
  CHECK(img.rho == rho);
  REQUIRE(img.mesh.V.rows() == mesh.V.rows());
  REQUIRE(img.hatH.size() == mesh.V.rows());
  for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
    const Vec3 X = mesh.V.row(i).transpose();
    const Vec3 N = mesh.N.row(i).transpose();
    CHECK((Vec3(img.mesh.V.row(i).transpose()) - geom::invertPoint(X, rho)).norm() <
          1e-12 * rho);
    CHECK((Vec3(img.mesh.N.row(i).transpose()) - reflect::reflectUnitNormal(X, N))
              .norm() < 1e-12);
    CHECK(img.hatH(i) ==
          doctest::Approx(reflect::reflectedMeanCurvature(X, N, s.meanCurvature, rho))
              .epsilon(1e-13));
  }
  // The image of the sphere part is again a sphere: constant image curvature.
  CHECK(std::abs(img.hatH.maxCoeff() - img.hatH.minCoeff()) <
        1e-10 * std::abs(img.hatH.maxCoeff()));

  // A mesh through the inversion center is rejected.
  TriMesh bad = mesh;
  bad.V.row(0).setZero();
  CHECK_THROWS(static_cast<void>(reflect::reflectSurface(bad, s.meanCurvature, rho)));
}

TEST_CASE("discrete mean curvature on a structured sphere band") {
  rings::GridSpec grid;
  grid.nv = 96;
  const double R = 1.2;
  rings::CurvatureChart chart =
      rings::sphereBandChart(R, -1.0, grid, Vec3(2.5, 0.3, 0.0));
  const TriMesh mesh = rings::chartToMesh(chart);
  const reflect::DiscreteCurvature dc = reflect::discreteMeanCurvature(mesh);
  REQUIRE(dc.H.size() == mesh.V.rows());
  int reliable = 0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < dc.H.size(); ++i) {
    if (!dc.reliable[static_cast<std::size_t>(i)]) continue;
    ++reliable;
    worst = std::max(worst, std::abs(dc.H(i) - 1.0 / R));
  }
  CHECK(reliable > 0);
  CHECK(worst < 0.02 / R);
  // Boundary rows carry incomplete one-rings and must be flagged.
  const MeshTopology topo = analyzeTopology(mesh);
  for (const auto& loop : topo.boundaryLoops) {
    for (int v : loop) CHECK(!dc.reliable[static_cast<std::size_t>(v)]);
  }
}

TEST_CASE("image curvature of the off-center sphere band is subharmonic") {
  rings::GridSpec grid;
  grid.nv = 192;
  const double R = 1.0;
  const Vec3 center(2.1662, 0.0, 0.0);
  rings::CurvatureChart chart = rings::sphereBandChart(R, -1.4, grid, center);
  const double rho1 = std::sqrt(center.squaredNorm() - R * R);

  for (double rho : {0.9 * rho1, rho1, 1.2 * rho1}) {
    const reflect::SubharmonicityResult res = reflect::subharmonicityCheck(chart, rho);
    CHECK(res.hPositive);
    CHECK(res.interiorNodes > 0);
    // Laplacian comparison scale: curvature over squared length. On a sphere
    // the image field is constant, so this bounds pure stencil noise.
    CHECK(res.minLaplacian > -1e-4 * chart.H / (rho * rho));
    // The image of a sphere is a sphere: hatH == H rho1^2 / rho^2 everywhere.
    CHECK(res.maxHat ==
          doctest::Approx(chart.H * rho1 * rho1 / (rho * rho)).epsilon(1e-9));
  }

  rings::CurvatureChart flipped = chart;
  flipped.H = -chart.H;
  CHECK(!reflect::subharmonicityCheck(flipped, rho1).hPositive);
}

TEST_CASE("max principle on a genuinely varying chart: maximizer on the rim") {
  // The bridge's image-curvature field varies, so the interior max principle
  // has teeth: the maximizer of hatH over {|X| >= rho} must sit on the
  // subdomain boundary.
  rings::GridSpec grid;
  grid.nv = 160;
  rings::CurvatureChart chart = rings::delaunayBridge(2.3, 2.3, 0.8, 1.0, grid);
  double rLo = std::numeric_limits<double>::infinity(), rHi = 0.0;
  for (int i = 0; i < chart.nu(); ++i) {
    for (int j = 0; j < chart.nv(); ++j) {
      const double r = chart.point(i, j).norm();
      rLo = std::min(rLo, r);
      rHi = std::max(rHi, r);
    }
  }
  for (double t : {0.25, 0.5, 0.75}) {
    const double rho = rLo + t * (rHi - rLo);
    const reflect::SubharmonicityResult res = reflect::subharmonicityCheck(chart, rho);
    CHECK(res.hPositive);
    if (res.interiorNodes > 0) {
      CHECK(res.maximizerOnBoundary);
      CHECK(res.minLaplacian > -1e-3 * chart.H / (rho * rho));
    }
  }
}

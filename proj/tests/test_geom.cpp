#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "wedgecmc/geom.hpp"

using namespace wedgecmc;
using testsup::kPi;

TEST_CASE("wedge rejects invalid openings") {
  CHECK_THROWS_AS(geom::Wedge{0.0}, std::invalid_argument);
  CHECK_THROWS_AS(geom::Wedge{kPi}, std::invalid_argument);
  CHECK_THROWS_AS(geom::Wedge{-0.5}, std::invalid_argument);
  CHECK_NOTHROW(geom::Wedge{0.9});
}

TEST_CASE("wedge face frames") {
  const geom::Wedge w(0.9);
  for (int i = 0; i < 2; ++i) {
    const Vec3 n = w.faceInwardNormal(i);
    const Vec3 d = w.faceDirection(i);
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(n.dot(d)) < 1e-15);
    CHECK(n(2) == 0.0);  // faces contain the vertex line
    CHECK(d(2) == 0.0);
    // The face plane at azimuth +/- alpha/2 passes through the origin.
    CHECK(std::abs(w.faceDistance(Vec3::Zero(), i)) < 1e-15);
    // Points along the face direction stay on the face plane.
    CHECK(std::abs(w.faceDistance((2.5 * d).eval(), i)) < 1e-15);
  }
  // The bisector direction is interior; beyond the half-opening is exterior.
  CHECK(w.contains(Vec3(1.0, 0.0, 3.0)));
  CHECK(!w.contains(Vec3(std::cos(0.55), std::sin(0.55), 0.0)));
  CHECK(!w.contains(Vec3(std::cos(0.55), -std::sin(0.55), 0.0)));
  // Interior sign convention: positive distance on the inside.
  CHECK(w.faceDistance(Vec3(1.0, 0.0, 0.0), 0) > 0.0);
  CHECK(w.faceDistance(Vec3(1.0, 0.0, 0.0), 1) > 0.0);
}

TEST_CASE("point inversion is involutive and fixes the inversion sphere") {
  auto rng = testsup::makeRng(11);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  for (int k = 0; k < 50; ++k) {
    const double rho = unif(rng);
    const Vec3 X = unif(rng) * testsup::randomUnit(rng);
    const Vec3 XX = geom::invertPoint(geom::invertPoint(X, rho), rho);
    CHECK((XX - X).norm() < 1e-12 * X.norm());
    const Vec3 onSphere = rho * testsup::randomUnit(rng);
    CHECK((geom::invertPoint(onSphere, rho) - onSphere).norm() < 1e-12 * rho);
  }
  CHECK_THROWS_AS(geom::invertPoint(Vec3::Zero(), 1.0), std::domain_error);
}

TEST_CASE("sphere inversion maps spheres onto the predicted image") {
  auto rng = testsup::makeRng(23);
  std::uniform_real_distribution<double> unif(0.3, 2.5);
  for (int k = 0; k < 30; ++k) {
    geom::Sphere s;
    s.center = (1.5 + unif(rng)) * testsup::randomUnit(rng);
    s.radius = unif(rng) * 0.4;
    const double rho = unif(rng);
    const geom::SphereImage img = geom::invertSphere(s, rho);
    REQUIRE(!img.isPlane);
    for (int m = 0; m < 16; ++m) {
      const Vec3 X = s.center + s.radius * testsup::randomUnit(rng);
      const Vec3 hatX = geom::invertPoint(X, rho);
      CHECK(std::abs((hatX - img.sphere.center).norm() - img.sphere.radius) <
            1e-10 * img.sphere.radius);
    }
  }
}

TEST_CASE("sphere through the origin inverts to a plane") {
  auto rng = testsup::makeRng(37);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int k = 0; k < 10; ++k) {
    geom::Sphere s;
    s.radius = unif(rng);
    s.center = s.radius * testsup::randomUnit(rng);  // passes through origin
    const double rho = unif(rng);
    const geom::SphereImage img = geom::invertSphere(s, rho);
    REQUIRE(img.isPlane);
    for (int m = 0; m < 16; ++m) {
      Vec3 X;
      do {
        X = s.center + s.radius * testsup::randomUnit(rng);
      } while (X.norm() < 1e-3 * s.radius);
      const Vec3 hatX = geom::invertPoint(X, rho);
      CHECK(std::abs(img.planeNormal.dot(hatX - img.planePoint)) <
            1e-9 * hatX.norm());
    }
  }
}

TEST_CASE("invariant radius is the tangent length and fixes the sphere") {
  const Vec3 c(2.0, -1.0, 0.5);
  const double R = 0.8;
  const double rho = geom::inversionInvariantRadius(c, R);
  CHECK(rho == doctest::Approx(std::sqrt(c.squaredNorm() - R * R)).epsilon(1e-14));
  const geom::SphereImage img = geom::invertSphere({c, R}, rho);
  REQUIRE(!img.isPlane);
  CHECK((img.sphere.center - c).norm() < 1e-12);
  CHECK(img.sphere.radius == doctest::Approx(R).epsilon(1e-12));
  // Origin on or inside the sphere has no tangent length.
  CHECK_THROWS_AS(geom::inversionInvariantRadius(Vec3(0.5, 0.0, 0.0), 0.8),
                  std::domain_error);
}

TEST_CASE("contact angle encoding") {
  // Two unit normals meeting at a known angle gamma: N'.N = -cos(gamma).
  for (double gamma : {0.3, kPi / 2, 2.8}) {
    const Vec3 nFace(0.0, 0.0, 1.0);
    const Vec3 nSurf(std::sin(gamma), 0.0, -std::cos(gamma));
    CHECK(geom::contactAngle(nFace, nSurf) == doctest::Approx(gamma).epsilon(1e-12));
  }
  CHECK_THROWS_AS(geom::contactAngle(Vec3(0, 0, 2), Vec3(1, 0, 0)),
                  std::invalid_argument);
}

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace wedgecmc {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
using Vec3 = Vec3T<double>;

namespace geom {

// Dihedral region of opening alpha about the x3-axis, interior at azimuths in
// (-alpha/2, +alpha/2). Face 0 sits at azimuth +alpha/2, face 1 at -alpha/2.
template <typename Scalar>
struct WedgeT {
  Scalar alpha;

  explicit WedgeT(Scalar opening) : alpha(opening) {
    if (!(alpha > Scalar(0)) || !(alpha < Scalar(EIGEN_PI)))
      throw std::invalid_argument("wedge opening must lie in (0, pi)");
  }

  // Unit normal of face i pointing into the wedge interior.
  Vec3T<Scalar> faceInwardNormal(int i) const {
    using std::cos;
    using std::sin;
    const Scalar s = alpha / Scalar(2);
    return i == 0 ? Vec3T<Scalar>(sin(s), -cos(s), Scalar(0))
                  : Vec3T<Scalar>(sin(s), cos(s), Scalar(0));
  }

  // Unit direction along face i, away from the vertex line.
  Vec3T<Scalar> faceDirection(int i) const {
    using std::cos;
    using std::sin;
    const Scalar s = alpha / Scalar(2);
    return i == 0 ? Vec3T<Scalar>(cos(s), sin(s), Scalar(0))
                  : Vec3T<Scalar>(cos(s), -sin(s), Scalar(0));
  }

  // Signed distance of p to the plane of face i, positive on the interior side.
  template <typename Derived>
  Scalar faceDistance(const Eigen::MatrixBase<Derived>& p, int i) const {
    return faceInwardNormal(i).dot(p);
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& p, Scalar tol = Scalar(0)) const {
    return faceDistance(p, 0) >= -tol && faceDistance(p, 1) >= -tol;
  }
};
using Wedge = WedgeT<double>;

template <typename Scalar>
struct SphereT {
  Vec3T<Scalar> center;
  Scalar radius;
};
using Sphere = SphereT<double>;

// Circle embedded in the plane through `center` with unit normal `planeNormal`.
template <typename Scalar>
struct PlanarCircleT {
  Vec3T<Scalar> center;
  Vec3T<Scalar> planeNormal;
  Scalar radius;
};
using PlanarCircle = PlanarCircleT<double>;

// Sphere inversion about `origin` with inversion radius rho.
// Fixed-point set is the sphere |X - origin| = rho; involutive away from origin.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vec3T<Scalar> invertPoint(const Eigen::MatrixBase<Derived>& X, Scalar rho,
                          const Vec3T<Scalar>& origin = Vec3T<Scalar>::Zero()) {
  const Vec3T<Scalar> d = X - origin;
  const Scalar n2 = d.squaredNorm();
  if (!(n2 > Scalar(0))) throw std::domain_error("invertPoint: point coincides with the inversion origin");
  return origin + (rho * rho / n2) * d;
}

// Image of a sphere under inversion: a sphere, unless the input passes through
// the origin, in which case the image is a plane.
struct SphereImage {
  bool isPlane = false;
  Sphere sphere{Vec3::Zero(), 0.0};
  Vec3 planePoint = Vec3::Zero();   // valid when isPlane
  Vec3 planeNormal = Vec3::Zero();  // valid when isPlane
};

inline SphereImage invertSphere(const Sphere& s, double rho, const Vec3& origin = Vec3::Zero()) {
  const Vec3 c = s.center - origin;
  const double pw = c.squaredNorm() - s.radius * s.radius;  // power of the origin
  const double scaleRef = c.squaredNorm() + s.radius * s.radius;
  SphereImage out;
  if (std::abs(pw) <= 1e-12 * scaleRef) {
    // Sphere through the origin: image is the plane orthogonal to the center
    // direction at distance rho^2 / (2 |c|).
    out.isPlane = true;
    out.planeNormal = c.normalized();
    out.planePoint = origin + out.planeNormal * (rho * rho / (2.0 * c.norm()));
    return out;
  }
  const double k = rho * rho / pw;
  out.sphere.center = origin + k * c;
  out.sphere.radius = std::abs(k) * s.radius;
  return out;
}

// Radius of the inversion sphere that maps the given sphere (or circle, seen as
// the set of its points) onto itself: the tangent length from the origin.
template <typename Scalar>
Scalar inversionInvariantRadius(const Vec3T<Scalar>& center, Scalar radius,
                                const Vec3T<Scalar>& origin = Vec3T<Scalar>::Zero()) {
  using std::sqrt;
  const Scalar p = (center - origin).squaredNorm() - radius * radius;
  if (!(p > Scalar(0)))
    throw std::domain_error("inversionInvariantRadius: origin lies inside or on the sphere");
  return sqrt(p);
}

// Contact angle encoded by N'.N = -cos(gamma) for unit normals pointing into
// the enclosed region. Returns gamma in [0, pi].
template <typename DerivedA, typename DerivedB,
          typename Scalar = typename DerivedA::Scalar>
Scalar contactAngle(const Eigen::MatrixBase<DerivedA>& N,
                    const Eigen::MatrixBase<DerivedB>& Nprime) {
  using std::abs;
  using std::acos;
  if (abs(N.norm() - Scalar(1)) > Scalar(1e-9) || abs(Nprime.norm() - Scalar(1)) > Scalar(1e-9))
    throw std::invalid_argument("contactAngle: normals must be unit length");
  Scalar c = -N.dot(Nprime);
  c = std::max(Scalar(-1), std::min(Scalar(1), c));
  return acos(c);
}

}  // namespace geom
}  // namespace wedgecmc

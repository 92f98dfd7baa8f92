#include "wedgecmc/spanner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "wedgecmc/util.hpp"

namespace wedgecmc {
namespace spanner {

namespace {

constexpr double kPi = 3.14159265358979323846;

void checkAngles(double gamma1, double gamma2, double alpha) {
  if (!(alpha > 0.0 && alpha < kPi)) {
    throw std::invalid_argument("wedge opening must lie in (0, pi)");
  }
  if (!(gamma1 >= 0.0 && gamma1 <= kPi) || !(gamma2 >= 0.0 && gamma2 <= kPi)) {
    throw std::invalid_argument("contact angles must lie in [0, pi]");
  }
}

// Spherical cap volume for contact angle gamma: the cap cut off beyond the
// face plane has height R(1 + cos(gamma)).
double capVolume(double radius, double gamma) {
  const double h = radius * (1.0 + std::cos(gamma));
  return kPi * h * h * (3.0 * radius - h) / 3.0;
}

// Distance from a point in the x1x2-plane to the closed cone
// {n1.p <= 0, n2.p <= 0}, i.e. the reflection of the wedge through the vertex.
// The cone is spanned by the rays -dir0 and -dir1 (outward face bisectors).
double distanceToOppositeCone(const geom::Wedge& wedge, const Vec3& p) {
  if (wedge.faceDistance(p, 0) <= 0.0 && wedge.faceDistance(p, 1) <= 0.0) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    const Vec3 u = -wedge.faceDirection(i);
    const double t = std::max(0.0, p.dot(u));
    best = std::min(best, (p - t * u).norm());
  }
  return best;
}

}  // namespace

GateResult existenceGate(double gamma1, double gamma2, double alpha) {
  checkAngles(gamma1, gamma2, alpha);
  GateResult out;
  out.margin = gamma1 + gamma2 - kPi - alpha;
  out.exists = out.margin > 0.0;
  return out;
}

WedgeSphere solveSphere(double gamma1, double gamma2, double alpha, double radius) {
  checkAngles(gamma1, gamma2, alpha);
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("sphere radius must be positive");
  }
  const double margin = gamma1 + gamma2 - kPi - alpha;
  if (!(margin > 0.0)) {
    throw std::runtime_error(
        "non-existent: no spanning sphere, contact angles fail "
        "gamma1 + gamma2 > pi + opening");
  }
  const geom::Wedge wedge(alpha);
  const double s = 0.5 * alpha;

  // Signed distances from the center to the faces must equal -R cos(gamma_i).
  // With center = d (cos(phi), sin(phi), 0) the face distances are
  // d sin(s -/+ phi), a linear system in (x, y) = d (cos(phi), sin(phi)):
  //   x sin(s) - y cos(s) = h1,  x sin(s) + y cos(s) = h2.
  const double h1 = -radius * std::cos(gamma1);
  const double h2 = -radius * std::cos(gamma2);
  const double x = (h1 + h2) / (2.0 * std::sin(s));
  const double y = (h2 - h1) / (2.0 * std::cos(s));
  const double d2 = x * x + y * y;
  const double r2 = radius * radius;

  // A positive margin places the center strictly outside the sphere, so the
  // face circles sit on the wedge side of the vertex; if the arithmetic ever
  // lands inside, the closed form above is wrong, not the inputs.
  if (!(d2 - r2 > 0.0)) {
    throw std::logic_error("sphere solve: center not outside the sphere");
  }

  WedgeSphere out;
  out.gamma1 = gamma1;
  out.gamma2 = gamma2;
  out.alpha = alpha;
  out.margin = margin;
  out.center = Vec3(x, y, 0.0);
  out.radius = radius;
  out.centerDistance = std::sqrt(d2);
  out.centerAzimuth = std::atan2(y, x);
  out.meanCurvature = 1.0 / radius;

  const double faceOffsets[2] = {h1, h2};
  const double gammas[2] = {gamma1, gamma2};
  for (int i = 0; i < 2; ++i) {
    const Vec3 n = wedge.faceInwardNormal(i);
    const double got = wedge.faceDistance(out.center, i);
    if (std::abs(got - faceOffsets[i]) > 1e-10 * radius) {
      throw std::logic_error("sphere solve postcondition failed");
    }
    ContactDisk& disk = out.contacts[static_cast<std::size_t>(i)];
    disk.center = out.center - faceOffsets[i] * n;
    disk.planeNormal = n;
    const double rc2 = std::max(0.0, r2 - faceOffsets[i] * faceOffsets[i]);
    disk.radius = std::sqrt(rc2);
    disk.degenerate = gammas[i] >= kPi - 1e-12 || disk.radius <= 1e-9 * radius;
  }
  return out;
}

VolumeResult spannerVolume(const WedgeSphere& s) {
  VolumeResult out;
  const geom::Wedge wedge = s.wedge();

  // The two caps sliced off by the face planes are disjoint exactly when the
  // region behind both planes stays farther than R from the center.
  const double coneDist = distanceToOppositeCone(wedge, s.center);
  if (coneDist > s.radius * (1.0 + 1e-12)) {
    const double ball = 4.0 / 3.0 * kPi * s.radius * s.radius * s.radius;
    out.volume = ball - capVolume(s.radius, s.gamma1) - capVolume(s.radius, s.gamma2);
    out.mcFallback = false;
  } else {
    out.volume = ballWedgeVolumeMC(s);
    out.mcFallback = true;
  }
  return out;
}

double ballWedgeVolumeMC(const WedgeSphere& s, std::uint64_t seed, std::size_t samples) {
  const geom::Wedge wedge = s.wedge();
  const double R = s.radius;
  const double ballVolume = 4.0 / 3.0 * kPi * R * R * R;

  // Fixed partition into 64 streams so the result does not depend on the
  // thread budget.
  constexpr std::size_t kStreams = 64;
  std::array<std::size_t, kStreams> hits{};
  std::array<std::size_t, kStreams> quota{};
  for (std::size_t k = 0; k < kStreams; ++k) {
    quota[k] = samples / kStreams + (k < samples % kStreams ? 1 : 0);
  }

  parallelFor(kStreams, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      std::size_t accepted = 0, inside = 0;
      while (accepted < quota[k]) {
        const double a = unit(rng), b = unit(rng), c = unit(rng);
        if (a * a + b * b + c * c > 1.0) continue;
        ++accepted;
        const Vec3 p = s.center + R * Vec3(a, b, c);
        if (wedge.faceDistance(p, 0) > 0.0 && wedge.faceDistance(p, 1) > 0.0) {
          ++inside;
        }
      }
      hits[k] = inside;
    }
  });

  std::size_t inside = 0;
  for (std::size_t k = 0; k < kStreams; ++k) inside += hits[k];
  return ballVolume * static_cast<double>(inside) / static_cast<double>(samples);
}

WedgeSphere constructSpanner(double gamma1, double gamma2, double alpha,
                             const SpannerIndex& index) {
  const GateResult gate = existenceGate(gamma1, gamma2, alpha);
  if (!gate.exists) {
    throw std::runtime_error(
        "non-existent: no spanning sphere, contact angles fail "
        "gamma1 + gamma2 > pi + opening");
  }
  if (!(index.value > 0.0) || !std::isfinite(index.value)) {
    throw std::invalid_argument("spanner index value must be positive");
  }
  if (index.kind == IndexKind::MeanCurvature) {
    return solveSphere(gamma1, gamma2, alpha, 1.0 / index.value);
  }
  // Volume index: the family is homothetic, so volume scales as R^3.
  const WedgeSphere unit = solveSphere(gamma1, gamma2, alpha, 1.0);
  const double unitVolume = spannerVolume(unit).volume;
  const double radius = std::cbrt(index.value / unitVolume);
  return solveSphere(gamma1, gamma2, alpha, radius);
}

TriMesh meshSpanner(const WedgeSphere& s, int resolution) {
  if (resolution < 8) {
    throw std::invalid_argument("mesh resolution must be at least 8");
  }
  if (s.contacts[0].degenerate || s.contacts[1].degenerate) {
    throw std::invalid_argument(
        "degenerate boundary: tangential contact circle has zero radius");
  }
  const double R = s.radius;
  const double d = s.centerDistance;
  const double phi = s.centerAzimuth;
  const double sHalf = 0.5 * s.alpha;

  // Sections by the pencil of planes through the vertex line: the plane at
  // azimuth theta cuts the sphere in a full circle of radius
  // sqrt(R^2 - d^2 sin^2(phi - theta)) centered at the foot of the center.
  const int nPsi = resolution;
  const double aspect = s.alpha * (d + R) / (2.0 * kPi * R);
  const int nTheta = std::max(8, static_cast<int>(std::ceil(resolution * aspect)));

  TriMesh mesh;
  mesh.V.resize((nTheta + 1) * nPsi, 3);
  mesh.N.resize((nTheta + 1) * nPsi, 3);
  mesh.F.resize(2 * nTheta * nPsi, 3);

  for (int i = 0; i <= nTheta; ++i) {
    const double theta = -sHalf + s.alpha * static_cast<double>(i) / nTheta;
    const Vec3 dir(std::cos(theta), std::sin(theta), 0.0);
    const Vec3 perp(-std::sin(theta), std::cos(theta), 0.0);
    const double off = d * std::sin(phi - theta);  // center offset from plane
    const Vec3 foot = s.center - off * perp;
    const double rc = std::sqrt(std::max(0.0, R * R - off * off));
    for (int j = 0; j < nPsi; ++j) {
      const double psi = 2.0 * kPi * static_cast<double>(j) / nPsi;
      const Vec3 X = foot + rc * (std::cos(psi) * dir + std::sin(psi) * Vec3::UnitZ());
      const int v = i * nPsi + j;
      mesh.V.row(v) = X.transpose();
      mesh.N.row(v) = ((s.center - X) / R).transpose();  // inward normal
    }
  }

  int f = 0;
  for (int i = 0; i < nTheta; ++i) {
    for (int j = 0; j < nPsi; ++j) {
      const int jn = (j + 1) % nPsi;
      const int v00 = i * nPsi + j;
      const int v10 = (i + 1) * nPsi + j;
      const int v11 = (i + 1) * nPsi + jn;
      const int v01 = i * nPsi + jn;
      mesh.F.row(f++) << v00, v10, v11;
      mesh.F.row(f++) << v00, v11, v01;
    }
  }
  return mesh;
}

std::vector<RegionSample> existenceRegionSamples(const std::vector<double>& alphas,
                                                 const std::vector<double>& gammas) {
  std::vector<RegionSample> out;
  out.reserve(alphas.size() * gammas.size() * gammas.size());
  for (double alpha : alphas) {
    for (double g1 : gammas) {
      for (double g2 : gammas) {
        const GateResult gate = existenceGate(g1, g2, alpha);
        RegionSample row;
        row.alpha = alpha;
        row.gamma1 = g1;
        row.gamma2 = g2;
        row.margin = gate.margin;
        row.exists = gate.exists;
        out.push_back(row);
      }
    }
  }
  return out;
}

}  // namespace spanner
}  // namespace wedgecmc

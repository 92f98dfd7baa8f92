#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wedgecmc/geom.hpp"
#include "wedgecmc/mesh.hpp"

namespace wedgecmc {
namespace spanner {

// Margin of the existence inequality gamma1 + gamma2 > pi + alpha.
struct GateResult {
  bool exists = false;
  double margin = 0.0;  // radians
};
GateResult existenceGate(double gamma1, double gamma2, double alpha);

struct ContactDisk {
  Vec3 center = Vec3::Zero();       // disk center, lies in the face plane
  Vec3 planeNormal = Vec3::Zero();  // face inward normal
  double radius = 0.0;
  bool degenerate = false;          // tangential contact (radius 0)
};

// CMC sphere spanning the canonical wedge: center on x3 = 0, wetted disks in
// the two faces, contact angles gamma1 (face 0, azimuth +alpha/2) and gamma2
// (face 1, azimuth -alpha/2).
struct WedgeSphere {
  double gamma1 = 0.0, gamma2 = 0.0, alpha = 0.0;
  double margin = 0.0;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double centerDistance = 0.0;  // distance from the vertex line
  double centerAzimuth = 0.0;
  double meanCurvature = 0.0;   // w.r.t. the inward normal
  std::array<ContactDisk, 2> contacts;

  geom::Wedge wedge() const { return geom::Wedge(alpha); }
};

// Closed-form solve for the spanning sphere of the given radius.
// Throws std::runtime_error("non-existent: ...") outside the existence region.
WedgeSphere solveSphere(double gamma1, double gamma2, double alpha, double radius);

struct VolumeResult {
  double volume = 0.0;
  bool mcFallback = false;
};
VolumeResult spannerVolume(const WedgeSphere& s);

// Fixed-seed Monte-Carlo estimate of vol(ball ∩ wedge); deterministic and
// independent of the thread budget.
double ballWedgeVolumeMC(const WedgeSphere& s, std::uint64_t seed = 0x5eed5eedULL,
                         std::size_t samples = 1000000);

enum class IndexKind { Volume, MeanCurvature };
struct SpannerIndex {
  IndexKind kind = IndexKind::MeanCurvature;
  double value = 1.0;
};
WedgeSphere constructSpanner(double gamma1, double gamma2, double alpha,
                             const SpannerIndex& index);

// Structured annulus mesh of the sphere part between the two contact circles.
// `resolution` is the vertex count around each circular section.
TriMesh meshSpanner(const WedgeSphere& s, int resolution);

struct RegionSample {
  double alpha = 0.0, gamma1 = 0.0, gamma2 = 0.0, margin = 0.0;
  bool exists = false;
};
std::vector<RegionSample> existenceRegionSamples(const std::vector<double>& alphas,
                                                 const std::vector<double>& gammas);

}  // namespace spanner
}  // namespace wedgecmc

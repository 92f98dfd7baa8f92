#pragma once

#include <string>
#include <vector>

#include "wedgecmc/geom.hpp"
#include "wedgecmc/mesh.hpp"

namespace wedgecmc {
namespace verify {

// Topological gate: compact connected orientable surface with exactly two
// boundary components and Euler characteristic zero (an annulus).
struct RingTypeResult {
  bool ringType = false;
  int eulerCharacteristic = 0;
  int boundaryLoopCount = 0;
  bool connected = false;
  bool orientable = false;
};
// Throws std::runtime_error on a non-manifold mesh.
RingTypeResult ringTypeCheck(const TriMesh& mesh);

struct LoopAdherence {
  int face = -1;                   // wedge face holding the loop's plane
  double gamma = 0.0;              // contact angle: arccos(-median N'.N)
  double angleMaxDeviation = 0.0;  // max |N'.N - median| over the loop (cosine units)
  double maxTurningAngle = 0.0;    // discrete smoothness proxy for the loop (rad)
};

struct AdherenceResult {
  // Closure condition: lateral surface plus planar wetted disks forms a
  // watertight, intersection-free closed surface.
  bool closureSimple = false;
  int selfIntersections = 0;
  // One-sided condition: the wedge is convex, so the surface lies inside it
  // exactly when every vertex clears both face planes.
  bool oneSided = false;
  double oneSidedWorst = 0.0;  // most negative face-plane clearance found
  // Constant-angle condition: N'.N constant along each loop within tolerance.
  bool constantAngle = false;
  bool boundarySmooth = true;
  std::vector<LoopAdherence> loops;
};

// tolAngle bounds the per-loop spread of N'.N (compared in cosine units).
AdherenceResult adherenceCheck(const TriMesh& mesh, const geom::Wedge& wedge,
                               double tolAngle = 1e-3);

struct CmcResult {
  double meanCurvature = 0.0;    // mean of the discrete estimate, interior vertices
  double maxRelDeviation = 0.0;  // max |H_i - mean| / |mean|
  int interiorSamples = 0;
};
// Throws std::runtime_error("no interior sample") when every vertex is on the
// boundary.
CmcResult cmcCheck(const TriMesh& mesh);

enum class Verdict {
  ConsistentWithExistence,  // ring type and positive existence margin
  InNonexistenceRegion,     // ring type but margin <= 0: no such drop can exist
  OutOfScopeTopology,       // not an annulus spanning both faces
};
std::string verdictName(Verdict v);

// Pure function of the topology gate and the existence margin
// gamma1 + gamma2 - pi - alpha.
Verdict existenceVerdict(const RingTypeResult& ringType, double margin);

struct VerifyOptions {
  double tolAngle = 1e-3;   // constant-angle spread bound
  double cmcRelTol = 0.02;  // max relative deviation of discrete H
};

struct VerificationReport {
  RingTypeResult ringType;
  AdherenceResult adherence;
  CmcResult cmc;
  double gammaMeasured[2] = {0.0, 0.0};  // per wedge face, from the loop medians
  double margin = 0.0;                   // gamma1 + gamma2 - pi - alpha (measured)
  bool facesSpanned = false;             // one loop on each wedge face
  Verdict verdict = Verdict::OutOfScopeTopology;
  bool allChecksPass = false;
  // A surface in the nonexistence region passing every geometric check would
  // contradict the classification; flagged rather than silently accepted.
  bool redFlag = false;
};

VerificationReport verifySurface(const TriMesh& mesh, const geom::Wedge& wedge,
                                 const VerifyOptions& options = VerifyOptions());

}  // namespace verify
}  // namespace wedgecmc

// wedgecmc: construct, reflect, sweep, and verify constant-mean-curvature
// surfaces spanning a dihedral wedge.
//
// Exit codes: 0 success; 1 existence-gate or verification failure;
// 2 out-of-scope input or module error; 64 usage error.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wedgecmc/io.hpp"
#include "wedgecmc/reflect.hpp"
#include "wedgecmc/rings.hpp"
#include "wedgecmc/spanner.hpp"
#include "wedgecmc/sweep.hpp"
#include "wedgecmc/util.hpp"
#include "wedgecmc/verify.hpp"

namespace {

using json = nlohmann::json;
using namespace wedgecmc;

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kDefaultSeed = 0x5eed5eedULL;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;       // gate or verification failure
constexpr int kExitModule = 2;     // out-of-scope input or module error
constexpr int kExitUsage = 64;

double toRad(double v, bool deg) { return deg ? v * kPi / 180.0 : v; }

// Canonical config string: fixed key order, 17-digit floats. Hash goes into
// every report for reproducibility.
class ConfigString {
 public:
  ConfigString& add(const std::string& key, double v) {
    s_ += key + "=" + io::formatDouble(v) + ";";
    return *this;
  }
  ConfigString& add(const std::string& key, const std::string& v) {
    s_ += key + "=" + v + ";";
    return *this;
  }
  ConfigString& add(const std::string& key, std::uint64_t v) {
    s_ += key + "=" + std::to_string(v) + ";";
    return *this;
  }
  const std::string& str() const { return s_; }

 private:
  std::string s_;
};

void emitReport(const json& j, const std::string& reportPath) {
  if (!reportPath.empty()) io::writeJson(reportPath, j);
  std::cout << j.dump(2) << "\n";
}

json sphereJson(const spanner::WedgeSphere& s) {
  json j;
  j["alpha"] = s.alpha;
  j["gamma1"] = s.gamma1;
  j["gamma2"] = s.gamma2;
  j["margin"] = s.margin;
  j["center"] = io::toJson(s.center);
  j["radius"] = s.radius;
  j["centerDistance"] = s.centerDistance;
  j["centerAzimuth"] = s.centerAzimuth;
  j["meanCurvature"] = s.meanCurvature;
  for (int i = 0; i < 2; ++i) {
    json c;
    c["center"] = io::toJson(s.contacts[static_cast<std::size_t>(i)].center);
    c["planeNormal"] = io::toJson(s.contacts[static_cast<std::size_t>(i)].planeNormal);
    c["radius"] = s.contacts[static_cast<std::size_t>(i)].radius;
    c["degenerate"] = s.contacts[static_cast<std::size_t>(i)].degenerate;
    j["contacts"].push_back(c);
  }
  return j;
}

json sweepJson(const sweep::SweepReport& r) {
  json j;
  j["firstContactRadius"] = r.firstContactRadius;
  j["touchRadius"] = r.touchRadius;
  j["bracketWidth"] = r.bracketWidth;
  j["ambiguousCount"] = r.ambiguousCount;
  j["coincidenceResidual"] = r.coincidenceResidual;
  j["symmetric"] = r.symmetric;
  j["conclusive"] = r.conclusive;
  j["touchTags"] = json::array();
  for (sweep::Tag t : r.touchTags) j["touchTags"].push_back(sweep::tagName(t));
  j["touchPoints"] = json::array();
  for (const Vec3& p : r.touchPoints) j["touchPoints"].push_back(io::toJson(p));
  j["boundedness"] = {
      {"maxExcess", r.boundedness.maxExcess},
      {"argmax", io::toJson(r.boundedness.argmax)},
      {"argmaxRho", r.boundedness.argmaxRho},
      {"maximizerOnBoundaryAll", r.boundedness.maximizerOnBoundaryAll},
      {"meanCurvatureUsed", r.boundedness.meanCurvatureUsed},
  };
  j["centrality"] = {
      {"maxXdotN", r.centrality.maxXdotN},
      {"maxXdotn", r.centrality.maxXdotn},
      {"centralEqualityViolations", r.centrality.centralEqualityViolations},
      {"minBoundaryNormalDot", r.centrality.minBoundaryNormalDot},
  };
  return j;
}

json verifyJson(const verify::VerificationReport& r) {
  json j;
  j["ringType"] = {
      {"ringType", r.ringType.ringType},
      {"eulerCharacteristic", r.ringType.eulerCharacteristic},
      {"boundaryLoopCount", r.ringType.boundaryLoopCount},
      {"connected", r.ringType.connected},
      {"orientable", r.ringType.orientable},
  };
  j["adherence"] = {
      {"closureSimple", r.adherence.closureSimple},
      {"selfIntersections", r.adherence.selfIntersections},
      {"oneSided", r.adherence.oneSided},
      {"oneSidedWorst", r.adherence.oneSidedWorst},
      {"constantAngle", r.adherence.constantAngle},
      {"boundarySmooth", r.adherence.boundarySmooth},
  };
  j["adherence"]["loops"] = json::array();
  for (const verify::LoopAdherence& la : r.adherence.loops) {
    j["adherence"]["loops"].push_back({
        {"face", la.face},
        {"gamma", la.gamma},
        {"angleMaxDeviation", la.angleMaxDeviation},
        {"maxTurningAngle", la.maxTurningAngle},
    });
  }
  j["cmc"] = {
      {"meanCurvature", r.cmc.meanCurvature},
      {"maxRelDeviation", r.cmc.maxRelDeviation},
      {"interiorSamples", r.cmc.interiorSamples},
  };
  j["gammaMeasured"] = {r.gammaMeasured[0], r.gammaMeasured[1]};
  j["margin"] = r.margin;
  j["facesSpanned"] = r.facesSpanned;
  j["verdict"] = verify::verdictName(r.verdict);
  j["allChecksPass"] = r.allChecksPass;
  j["redFlag"] = r.redFlag;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constant-mean-curvature drops spanning a wedge"};
  app.require_subcommand(1);

  bool deg = false;
  app.add_flag("--deg", deg, "interpret angle inputs as degrees");

  // ---- gate ----
  auto* gateCmd = app.add_subcommand("gate", "existence test for a spanning sphere");
  double gGamma1 = 0, gGamma2 = 0, gAlpha = 0;
  std::string gateReport;
  gateCmd->add_option("--gamma1", gGamma1, "contact angle on face 0 (radians)")->required();
  gateCmd->add_option("--gamma2", gGamma2, "contact angle on face 1 (radians)")->required();
  gateCmd->add_option("--alpha", gAlpha, "wedge opening (radians)")->required();
  gateCmd->add_option("--report", gateReport, "also write the JSON report here");

  // ---- spanner ----
  auto* spanCmd = app.add_subcommand("spanner", "construct a spherical spanning drop");
  double sGamma1 = 0, sGamma2 = 0, sAlpha = 0;
  double sVolume = 0, sMeanCurv = 0;
  int sResolution = 64;
  std::uint64_t sSeed = kDefaultSeed;
  std::string sMesh, sReport;
  spanCmd->add_option("--gamma1", sGamma1, "contact angle on face 0")->required();
  spanCmd->add_option("--gamma2", sGamma2, "contact angle on face 1")->required();
  spanCmd->add_option("--alpha", sAlpha, "wedge opening")->required();
  auto* volOpt = spanCmd->add_option("--volume", sVolume, "index the drop by enclosed volume");
  auto* hOpt = spanCmd->add_option("--mean-curv", sMeanCurv, "index the drop by mean curvature");
  volOpt->excludes(hOpt);
  spanCmd->add_option("--resolution", sResolution, "vertices per circular section");
  spanCmd->add_option("--seed", sSeed, "Monte-Carlo seed for the volume fallback");
  spanCmd->add_option("--mesh", sMesh, "output OBJ path");
  spanCmd->add_option("--report", sReport, "output JSON path");

  // ---- bridge ----
  auto* bridgeCmd = app.add_subcommand("bridge", "rotational bridge between parallel planes");
  double bGamma1 = 0, bGamma2 = 0, bSep = 0, bMeanCurv = 0;
  int bNv = 256;
  std::string bMesh, bReport;
  bridgeCmd->add_option("--gamma1", bGamma1, "contact angle at the bottom plane")->required();
  bridgeCmd->add_option("--gamma2", bGamma2, "contact angle at the top plane")->required();
  bridgeCmd->add_option("--separation", bSep, "plane separation")->required();
  bridgeCmd->add_option("--mean-curv", bMeanCurv, "mean curvature")->required();
  bridgeCmd->add_option("--grid-nv", bNv, "grid points around the axis");
  bridgeCmd->add_option("--mesh", bMesh, "output OBJ path");
  bridgeCmd->add_option("--report", bReport, "output JSON path");

  // ---- reflect ----
  auto* reflectCmd = app.add_subcommand("reflect", "sphere-inversion image of a mesh");
  double rRho = 0;
  double rMeanCurv = std::numeric_limits<double>::quiet_NaN();
  std::string rIn, rOut, rReport;
  reflectCmd->add_option("--mesh", rIn, "input OBJ (with normals)")->required();
  reflectCmd->add_option("--rho", rRho, "inversion radius")->required();
  reflectCmd->add_option("--mean-curv", rMeanCurv,
                         "mean curvature of the input (default: estimate)");
  reflectCmd->add_option("--out", rOut, "output OBJ path for the image");
  reflectCmd->add_option("--report", rReport, "output JSON path");

  // ---- sweep ----
  auto* sweepCmd = app.add_subcommand("sweep", "reflection sweep for symmetry detection");
  double wAlpha = 0, wShift = 0;
  double wMeanCurv = std::numeric_limits<double>::quiet_NaN();
  bool wPlanar = false;
  std::string wIn, wReport;
  sweepCmd->add_option("--mesh", wIn, "input OBJ (with normals)")->required();
  sweepCmd->add_option("--alpha", wAlpha, "wedge opening")->required();
  sweepCmd->add_option("--origin-shift", wShift, "sweep origin along the vertex line");
  sweepCmd->add_option("--mean-curv", wMeanCurv, "mean curvature (default: estimate)");
  sweepCmd->add_flag("--planar", wPlanar, "planar sweep and section traces instead");
  sweepCmd->add_option("--report", wReport, "output JSON path");

  // ---- verify ----
  auto* verifyCmd = app.add_subcommand("verify", "hypothesis checks and existence verdict");
  double vAlpha = 0;
  std::string vIn, vReport;
  verifyCmd->add_option("--mesh", vIn, "input OBJ (with normals)")->required();
  verifyCmd->add_option("--alpha", vAlpha, "wedge opening")->required();
  verifyCmd->add_option("--report", vReport, "output JSON path");

  // ---- region ----
  auto* regionCmd = app.add_subcommand("region", "existence region table (CSV)");
  double regAlphaMin = 0.1, regAlphaMax = 3.0;
  int regAlphaSteps = 16, regGammaSteps = 64;
  std::string regOut, regReport;
  regionCmd->add_option("--alpha-min", regAlphaMin, "smallest wedge opening");
  regionCmd->add_option("--alpha-max", regAlphaMax, "largest wedge opening");
  regionCmd->add_option("--alpha-steps", regAlphaSteps, "wedge-opening samples");
  regionCmd->add_option("--gamma-steps", regGammaSteps, "contact-angle samples per axis");
  regionCmd->add_option("--out", regOut, "output CSV path")->required();
  regionCmd->add_option("--report", regReport, "output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(gateCmd)) {
      const double g1 = toRad(gGamma1, deg), g2 = toRad(gGamma2, deg), a = toRad(gAlpha, deg);
      ConfigString cfg;
      cfg.add("cmd", "gate").add("gamma1", g1).add("gamma2", g2).add("alpha", a);
      const spanner::GateResult gate = spanner::existenceGate(g1, g2, a);
      json j = io::reportSkeleton("gate", cfg.str(), kDefaultSeed);
      j["alpha"] = a;
      j["gamma1"] = g1;
      j["gamma2"] = g2;
      j["exists"] = gate.exists;
      j["margin"] = gate.margin;
      emitReport(j, gateReport);
      return gate.exists ? kExitOk : kExitFail;
    }

    if (app.got_subcommand(spanCmd)) {
      const double g1 = toRad(sGamma1, deg), g2 = toRad(sGamma2, deg), a = toRad(sAlpha, deg);
      ConfigString cfg;
      cfg.add("cmd", "spanner").add("gamma1", g1).add("gamma2", g2).add("alpha", a);
      spanner::SpannerIndex index;
      if (volOpt->count() > 0) {
        index.kind = spanner::IndexKind::Volume;
        index.value = sVolume;
        cfg.add("volume", sVolume);
      } else if (hOpt->count() > 0) {
        index.kind = spanner::IndexKind::MeanCurvature;
        index.value = sMeanCurv;
        cfg.add("meanCurv", sMeanCurv);
      } else {
        std::cerr << "spanner: one of --volume or --mean-curv is required\n";
        return kExitUsage;
      }
      cfg.add("resolution", static_cast<std::uint64_t>(sResolution));
      cfg.add("seed", sSeed);

      const spanner::GateResult gate = spanner::existenceGate(g1, g2, a);
      if (!gate.exists) {
        std::cerr << "non-existent: no spanning sphere, contact angles fail "
                     "gamma1 + gamma2 > pi + opening (margin "
                  << io::formatDouble(gate.margin) << ")\n";
        return kExitFail;
      }

      const spanner::WedgeSphere s = spanner::constructSpanner(g1, g2, a, index);
      const spanner::VolumeResult vol = spanner::spannerVolume(s);
      json j = io::reportSkeleton("spanner", cfg.str(), sSeed);
      j["sphere"] = sphereJson(s);
      j["volume"] = vol.volume;
      j["volumeByMonteCarlo"] = vol.mcFallback;
      j["resolution"] = sResolution;
      if (!sMesh.empty()) {
        const TriMesh mesh = spanner::meshSpanner(s, sResolution);
        io::writeObj(sMesh, mesh);
        j["mesh"] = {{"path", sMesh},
                     {"vertices", mesh.V.rows()},
                     {"faces", mesh.F.rows()}};
      }
      emitReport(j, sReport);
      return kExitOk;
    }

    if (app.got_subcommand(bridgeCmd)) {
      const double g1 = toRad(bGamma1, deg), g2 = toRad(bGamma2, deg);
      ConfigString cfg;
      cfg.add("cmd", "bridge").add("gamma1", g1).add("gamma2", g2)
         .add("separation", bSep).add("meanCurv", bMeanCurv)
         .add("nv", static_cast<std::uint64_t>(bNv));
      rings::GridSpec grid;
      grid.nv = bNv;
      rings::BridgeProfile profile;
      rings::CurvatureChart chart =
          rings::delaunayBridge(g1, g2, bSep, bMeanCurv, grid, std::nullopt, &profile);
      rings::fundamentalForms(chart);
      const rings::GapEstimate gap = rings::curvatureGap(chart);

      json j = io::reportSkeleton("bridge", cfg.str(), kDefaultSeed);
      j["gamma1"] = g1;
      j["gamma2"] = g2;
      j["separation"] = bSep;
      j["meanCurvature"] = bMeanCurv;
      j["profile"] = {{"flux", profile.flux},
                      {"r0", profile.r0},
                      {"rTop", profile.rTop},
                      {"arclength", profile.arclength},
                      {"uSpan", profile.uSpan},
                      {"bcResidual", profile.bcResidual}};
      j["curvatureGap"] = {{"c", gap.c}, {"maxDeviation", gap.maxDeviation}};
      j["grid"] = {{"nu", chart.nu()}, {"nv", chart.nv()}};
      if (!bMesh.empty()) {
        const TriMesh mesh = rings::chartToMesh(chart);
        io::writeObj(bMesh, mesh);
        j["mesh"] = {{"path", bMesh},
                     {"vertices", mesh.V.rows()},
                     {"faces", mesh.F.rows()}};
      }
      emitReport(j, bReport);
      return kExitOk;
    }

    if (app.got_subcommand(reflectCmd)) {
      ConfigString cfg;
      cfg.add("cmd", "reflect").add("mesh", rIn).add("rho", rRho);
      const TriMesh mesh = io::readObj(rIn);
      double H = rMeanCurv;
      if (std::isnan(H)) {
        const verify::CmcResult cmc = verify::cmcCheck(mesh);
        H = cmc.meanCurvature;
      } else {
        cfg.add("meanCurv", rMeanCurv);
      }
      const reflect::ReflectedSurface image = reflect::reflectSurface(mesh, H, rRho);
      json j = io::reportSkeleton("reflect", cfg.str(), kDefaultSeed);
      j["rho"] = rRho;
      j["meanCurvature"] = H;
      j["meanCurvatureEstimated"] = std::isnan(rMeanCurv);
      j["imageMeanCurvature"] = {{"min", image.hatH.minCoeff()},
                                 {"max", image.hatH.maxCoeff()},
                                 {"mean", image.hatH.mean()}};
      if (!rOut.empty()) {
        io::writeObj(rOut, image.mesh);
        j["mesh"] = {{"path", rOut},
                     {"vertices", image.mesh.V.rows()},
                     {"faces", image.mesh.F.rows()}};
      }
      emitReport(j, rReport);
      return kExitOk;
    }

    if (app.got_subcommand(sweepCmd)) {
      const double a = toRad(wAlpha, deg);
      ConfigString cfg;
      cfg.add("cmd", "sweep").add("mesh", wIn).add("alpha", a)
         .add("originShift", wShift).add("planar", std::uint64_t(wPlanar ? 1 : 0));
      const TriMesh mesh = io::readObj(wIn);
      const geom::Wedge wedge(a);
      sweep::SweepConfig config;
      config.originShift = wShift;
      config.meanCurvature = wMeanCurv;

      json j = io::reportSkeleton("sweep", cfg.str(), kDefaultSeed);
      j["alpha"] = a;
      j["originShift"] = wShift;
      if (wPlanar) {
        const sweep::PlanarTraceReport r = sweep::planarSweepAndTrace(mesh, wedge, config);
        j["plane"] = {{"sigma", r.plane.sigma},
                      {"bracketWidth", r.plane.bracketWidth},
                      {"coincidenceResidual", r.plane.coincidenceResidual},
                      {"symmetric", r.plane.symmetric},
                      {"conclusive", r.plane.conclusive}};
        j["traceCount"] = r.traces.size();
        j["traceCurvatures"] = r.traceCurvatures;
        j["traceMirrorAzimuth"] = r.traceMirrorAzimuth;
        j["gammaMeasured"] = {r.gammaMeasured[0], r.gammaMeasured[1]};
        j["angleSumResidual"] = r.angleSumResidual;
        j["degenerateTrace"] = r.degenerateTrace;
      } else {
        const sweep::SweepReport r = sweep::runSweep(mesh, wedge, config);
        j.update(sweepJson(r));
      }
      emitReport(j, wReport);
      return kExitOk;
    }

    if (app.got_subcommand(verifyCmd)) {
      const double a = toRad(vAlpha, deg);
      ConfigString cfg;
      cfg.add("cmd", "verify").add("mesh", vIn).add("alpha", a);
      const TriMesh mesh = io::readObj(vIn);
      const geom::Wedge wedge(a);
      const verify::VerificationReport r = verify::verifySurface(mesh, wedge);
      json j = io::reportSkeleton("verify", cfg.str(), kDefaultSeed);
      j["alpha"] = a;
      j.update(verifyJson(r));
      emitReport(j, vReport);
      if (r.verdict == verify::Verdict::OutOfScopeTopology) return kExitModule;
      return r.allChecksPass ? kExitOk : kExitFail;
    }

    if (app.got_subcommand(regionCmd)) {
      ConfigString cfg;
      cfg.add("cmd", "region").add("alphaMin", regAlphaMin).add("alphaMax", regAlphaMax)
         .add("alphaSteps", static_cast<std::uint64_t>(regAlphaSteps))
         .add("gammaSteps", static_cast<std::uint64_t>(regGammaSteps));
      if (regAlphaSteps < 1 || regGammaSteps < 2) {
        std::cerr << "region: need at least 1 alpha step and 2 gamma steps\n";
        return kExitUsage;
      }
      std::vector<double> alphas, gammas;
      for (int i = 0; i < regAlphaSteps; ++i) {
        const double t = regAlphaSteps == 1 ? 0.0
                                            : static_cast<double>(i) / (regAlphaSteps - 1);
        alphas.push_back(toRad(regAlphaMin + t * (regAlphaMax - regAlphaMin), deg));
      }
      for (int i = 0; i < regGammaSteps; ++i) {
        // Open at 0, closed at pi: gamma = 0 never admits a spanner.
        gammas.push_back(kPi * (i + 1) / regGammaSteps);
      }
      const std::vector<spanner::RegionSample> samples =
          spanner::existenceRegionSamples(alphas, gammas);
      io::writeRegionCsv(regOut, samples);
      json j = io::reportSkeleton("region", cfg.str(), kDefaultSeed);
      j["csv"] = regOut;
      j["rows"] = samples.size();
      emitReport(j, regReport);
      return kExitOk;
    }

    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModule;
  }
}

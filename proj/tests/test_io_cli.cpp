#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "wedgecmc/io.hpp"
#include "wedgecmc/rings.hpp"
#include "wedgecmc/spanner.hpp"
#include "wedgecmc/util.hpp"

using namespace wedgecmc;
namespace fs = std::filesystem;

namespace {

fs::path scratchDir() {
  const fs::path dir = fs::temp_directory_path() / "wedgecmc-io-tests";
  fs::create_directories(dir);
  return dir;
}

int runCli(const std::string& args) {
  const std::string cmd =
      std::string(WEDGECMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("doubles round-trip through the decimal format") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 3.14159265358979323846, 1e-308,
                   -2.2250738585072014e-308, 6.02214076e23, -1.0}) {
    const std::string s = io::formatDouble(v);
    // strtod, not stod: stod raises out_of_range on subnormal magnitudes.
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("OBJ writes and reads back the exact mesh") {
  const spanner::WedgeSphere s = spanner::solveSphere(2.8, 2.7, 0.9, 1.0);
  const TriMesh mesh = spanner::meshSpanner(s, 20);
  const fs::path path = scratchDir() / "roundtrip.obj";
  io::writeObj(path.string(), mesh);

  const TriMesh back = io::readObj(path.string());
  REQUIRE(back.V.rows() == mesh.V.rows());
  REQUIRE(back.F.rows() == mesh.F.rows());
  REQUIRE(back.hasNormals());
  CHECK((back.V - mesh.V).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.N - mesh.N).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.F - mesh.F).cwiseAbs().maxCoeff() == 0);

  // Boundary loops are recorded as comment blocks.
  const std::string text = slurp(path);
  CHECK(text.find("# boundary loop") != std::string::npos);
}

TEST_CASE("OBJ reader rejects malformed input") {
  const fs::path quad = scratchDir() / "quad.obj";
  std::ofstream(quad) << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
  CHECK_THROWS(static_cast<void>(io::readObj(quad.string())));

  const fs::path range = scratchDir() / "range.obj";
  std::ofstream(range) << "v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 9\n";
  CHECK_THROWS(static_cast<void>(io::readObj(range.string())));

  CHECK_THROWS(static_cast<void>(io::readObj((scratchDir() / "missing.obj").string())));
}

TEST_CASE("JSON reports carry the envelope and serialize deterministically") {
  const nlohmann::json skel = io::reportSkeleton("sweep", "a=1 b=2", 42);
  CHECK(skel.at("schema") == io::kSchema);
  CHECK(skel.at("version") == io::kToolVersion);
  CHECK(skel.at("command") == "sweep");
  CHECK(skel.at("seed") == 42);
  CHECK(skel.at("configHash") == toHex(fnv1a64("a=1 b=2")));

  const fs::path a = scratchDir() / "a.json";
  const fs::path b = scratchDir() / "b.json";
  io::writeJson(a.string(), skel);
  io::writeJson(b.string(), skel);
  const std::string ta = slurp(a);
  CHECK(ta == slurp(b));
  CHECK(!ta.empty());
  CHECK(ta.back() == '\n');
  // Keys come out sorted, so the envelope fields appear in lexical order.
  CHECK(ta.find("\"command\"") < ta.find("\"configHash\""));
  CHECK(ta.find("\"configHash\"") < ta.find("\"schema\""));
}

TEST_CASE("region CSV layout") {
  std::vector<spanner::RegionSample> samples(2);
  samples[0] = {0.5, 2.8, 2.9, 2.8 + 2.9 - testsup::kPi - 0.5, true};
  samples[1] = {1.0, 0.4, 0.5, 0.4 + 0.5 - testsup::kPi - 1.0, false};
  const fs::path path = scratchDir() / "region.csv";
  io::writeRegionCsv(path.string(), samples);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "alpha,gamma1,gamma2,exists,margin");
  std::getline(in, line);
  CHECK(line.find("0.5,") == 0);
  CHECK(line.find(",1,") != std::string::npos);  // exists encoded as 1/0
  std::getline(in, line);
  CHECK(line.find(",0,") != std::string::npos);
}

TEST_CASE("command line: existence gate exit codes") {
  CHECK(runCli("gate --gamma1 2.8 --gamma2 2.8 --alpha 0.9") == 0);
  CHECK(runCli("gate --gamma1 1.2 --gamma2 1.2 --alpha 0.9") == 1);
  CHECK(runCli("gate --gamma1 2.8 --gamma2 2.8") == 64);  // missing required
  CHECK(runCli("gate --no-such-flag 1") == 64);
  CHECK(runCli("") == 64);  // a subcommand is required
  // Degree mode matches the radian call.
  const fs::path degRep = scratchDir() / "deg.json";
  const fs::path radRep = scratchDir() / "rad.json";
  CHECK(runCli("--deg gate --gamma1 160 --gamma2 160 --alpha 51 --report " +
               degRep.string()) == 0);
  CHECK(runCli("gate --gamma1 2.7925268031909273 --gamma2 2.7925268031909273 "
               "--alpha 0.8901179185171081 --report " +
               radRep.string()) == 0);
  const auto dj = io::readJson(degRep.string());
  const auto rj = io::readJson(radRep.string());
  CHECK(std::abs(dj.at("margin").get<double>() - rj.at("margin").get<double>()) <
        1e-12);
}

TEST_CASE("command line: generate, verify, sweep pipeline") {
  const fs::path dir = scratchDir();
  const fs::path mesh = dir / "cli-spanner.obj";
  const fs::path vrep = dir / "cli-verify.json";
  const fs::path srep = dir / "cli-sweep.json";

  CHECK(runCli("spanner --gamma1 2.8 --gamma2 2.8 --alpha 0.9 --mean-curv 1.0 "
               "--resolution 24 --mesh " +
               mesh.string()) == 0);
  CHECK(fs::exists(mesh));

  CHECK(runCli("verify --mesh " + mesh.string() + " --alpha 0.9 --report " +
               vrep.string()) == 0);
  const auto vj = io::readJson(vrep.string());
  CHECK(vj.at("schema") == io::kSchema);
  CHECK(vj.at("verdict") == "consistent-with-existence");
  CHECK(vj.at("allChecksPass") == true);

  CHECK(runCli("sweep --mesh " + mesh.string() + " --alpha 0.9 --mean-curv 1.0 "
               "--report " +
               srep.string()) == 0);
  const auto sj = io::readJson(srep.string());
  CHECK(sj.at("conclusive") == true);
  CHECK(sj.at("symmetric") == true);
  CHECK(sj.at("touchRadius").get<double>() > 0.0);

  // Volume and mean curvature are mutually exclusive spanner indices.
  CHECK(runCli("spanner --gamma1 2.8 --gamma2 2.8 --alpha 0.9 --mean-curv 1.0 "
               "--volume 0.5 --mesh " +
               (dir / "never.obj").string()) == 64);

  // Out-of-existence parameters are a gate failure, not a crash.
  CHECK(runCli("spanner --gamma1 1.0 --gamma2 1.0 --alpha 0.9 --mean-curv 1.0 "
               "--mesh " +
               (dir / "never2.obj").string()) == 1);
}

TEST_CASE("command line: out-of-scope input reports module failure") {
  // A bridge between parallel plates has no boundary on the wedge faces, so
  // wedge-based verification is a module error (exit 2), not a crash.
  rings::GridSpec grid;
  grid.nv = 64;
  const TriMesh bridge = rings::chartToMesh(
      rings::delaunayBridge(2.3, 2.3, 0.8, 1.0, grid));
  const fs::path mesh = scratchDir() / "bridge.obj";
  io::writeObj(mesh.string(), bridge);
  CHECK(runCli("verify --mesh " + mesh.string() + " --alpha 0.9") == 2);
}

TEST_CASE("command line: region sampling writes the grid") {
  const fs::path csv = scratchDir() / "cli-region.csv";
  CHECK(runCli("region --alpha-min 0.4 --alpha-max 1.2 --alpha-steps 3 "
               "--gamma-steps 8 --out " +
               csv.string()) == 0);
  std::ifstream in(csv);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "alpha,gamma1,gamma2,exists,margin");
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3 * 8 * 8);
}

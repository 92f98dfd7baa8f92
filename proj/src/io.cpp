#include "wedgecmc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "wedgecmc/util.hpp"

namespace wedgecmc {
namespace io {

std::string formatDouble(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void writeObj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# wedgecmc surface\n";
  out << "# vertices " << mesh.V.rows() << " faces " << mesh.F.rows() << "\n";

  const MeshTopology topo = analyzeTopology(mesh);
  for (std::size_t li = 0; li < topo.boundaryLoops.size(); ++li) {
    out << "# boundary loop " << li << ":";
    for (int v : topo.boundaryLoops[li]) out << ' ' << (v + 1);
    out << "\n";
  }

  for (Eigen::Index i = 0; i < mesh.V.rows(); ++i) {
    out << "v " << formatDouble(mesh.V(i, 0)) << ' ' << formatDouble(mesh.V(i, 1))
        << ' ' << formatDouble(mesh.V(i, 2)) << "\n";
  }
  const bool normals = mesh.hasNormals();
  if (normals) {
    for (Eigen::Index i = 0; i < mesh.N.rows(); ++i) {
      out << "vn " << formatDouble(mesh.N(i, 0)) << ' ' << formatDouble(mesh.N(i, 1))
          << ' ' << formatDouble(mesh.N(i, 2)) << "\n";
    }
  }
  for (Eigen::Index f = 0; f < mesh.F.rows(); ++f) {
    out << "f";
    for (int c = 0; c < 3; ++c) {
      const int idx = mesh.F(f, c) + 1;
      out << ' ' << idx;
      if (normals) out << "//" << idx;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TriMesh readObj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<Vec3> verts, norms;
  std::vector<Eigen::Vector3i> faces;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "v") {
      Vec3 p;
      ls >> p(0) >> p(1) >> p(2);
      if (!ls) throw std::runtime_error("malformed vertex line in " + path);
      verts.push_back(p);
    } else if (tok == "vn") {
      Vec3 p;
      ls >> p(0) >> p(1) >> p(2);
      if (!ls) throw std::runtime_error("malformed normal line in " + path);
      norms.push_back(p);
    } else if (tok == "f") {
      std::vector<int> idx;
      std::string corner;
      while (ls >> corner) {
        // Accept "i", "i/t", "i//n", "i/t/n"; only the vertex index is used.
        const std::size_t slash = corner.find('/');
        const std::string head = slash == std::string::npos ? corner : corner.substr(0, slash);
        idx.push_back(std::stoi(head));
      }
      if (idx.size() != 3) throw std::runtime_error("non-triangular face in " + path);
      for (int& i : idx) {
        if (i < 0) i = static_cast<int>(verts.size()) + i + 1;  // relative indices
        if (i < 1 || i > static_cast<int>(verts.size())) {
          throw std::runtime_error("face index out of range in " + path);
        }
      }
      faces.emplace_back(idx[0] - 1, idx[1] - 1, idx[2] - 1);
    }
  }

  TriMesh mesh;
  mesh.V.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    mesh.V.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
  }
  if (norms.size() == verts.size()) {
    mesh.N.resize(static_cast<Eigen::Index>(norms.size()), 3);
    for (std::size_t i = 0; i < norms.size(); ++i) {
      mesh.N.row(static_cast<Eigen::Index>(i)) = norms[i].transpose();
    }
  } else {
    mesh.N.resize(0, 3);
  }
  mesh.F.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    mesh.F.row(static_cast<Eigen::Index>(f)) = faces[f].transpose();
  }
  return mesh;
}

nlohmann::json reportSkeleton(const std::string& command,
                              const std::string& configString, std::uint64_t seed) {
  nlohmann::json j;
  j["schema"] = kSchema;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["configHash"] = toHex(fnv1a64(configString));
  j["seed"] = seed;
  return j;
}

void writeJson(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json readJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

nlohmann::json toJson(const Vec3& v) {
  return nlohmann::json::array({v(0), v(1), v(2)});
}

void writeRegionCsv(const std::string& path,
                    const std::vector<spanner::RegionSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "alpha,gamma1,gamma2,exists,margin\n";
  for (const spanner::RegionSample& s : samples) {
    out << formatDouble(s.alpha) << ',' << formatDouble(s.gamma1) << ','
        << formatDouble(s.gamma2) << ',' << (s.exists ? 1 : 0) << ','
        << formatDouble(s.margin) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace io
}  // namespace wedgecmc

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wedgecmc/mesh.hpp"
#include "wedgecmc/spanner.hpp"

namespace wedgecmc {
namespace io {

inline constexpr const char* kSchema = "wedgecmc/1";
inline constexpr const char* kToolVersion = "0.1.0";

// 17-significant-digit decimal form: doubles round-trip exactly.
std::string formatDouble(double value);

// ASCII OBJ: header comments, boundary loops as comment blocks, vertices
// (17 significant digits), per-vertex normals, then faces (1-based, v//vn).
void writeObj(const std::string& path, const TriMesh& mesh);
TriMesh readObj(const std::string& path);

// Common envelope for every JSON report: schema, tool version, the FNV-1a
// hash of the canonical config string, and the seed in use.
nlohmann::json reportSkeleton(const std::string& command,
                              const std::string& configString, std::uint64_t seed);

// Serialized with sorted keys (nlohmann's default object ordering), two-space
// indent, trailing newline; identical inputs give byte-identical files.
void writeJson(const std::string& path, const nlohmann::json& j);
nlohmann::json readJson(const std::string& path);

nlohmann::json toJson(const Vec3& v);

void writeRegionCsv(const std::string& path,
                    const std::vector<spanner::RegionSample>& samples);

}  // namespace io
}  // namespace wedgecmc

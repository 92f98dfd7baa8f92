#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wedgecmc/bvh.hpp"
#include "wedgecmc/geom.hpp"

namespace wedgecmc {

// Triangulated surface with consistently wound faces and per-vertex unit
// normals pointing into the enclosed drop region.
struct TriMesh {
  Eigen::MatrixXd V;  // #V x 3
  Eigen::MatrixXd N;  // #V x 3; zero rows when normals are absent
  Eigen::MatrixXi F;  // #F x 3

  bool hasNormals() const { return N.rows() == V.rows() && V.rows() > 0; }
  double bboxDiagonal() const;
};

struct MeshTopology {
  int vertexCount = 0, edgeCount = 0, faceCount = 0;
  int eulerCharacteristic = 0;
  bool edgeManifold = true, orientable = true, connected = true, closed = true;
  std::vector<std::vector<int>> boundaryLoops;  // ordered vertex cycles
};

MeshTopology analyzeTopology(const TriMesh& mesh);

// Closes every boundary loop with a triangle fan about the loop centroid,
// wound so the result pairs every directed edge.
TriMesh capBoundaryLoops(const TriMesh& mesh);

// Number of properly intersecting non-adjacent triangle pairs.
int selfIntersectionCount(const TriMesh& mesh);

namespace geom {

enum class Membership { Inside, Outside, Boundary };

// Point-membership oracle for the compact region bounded by a watertight mesh.
// Points within epsGeom of the surface are reported as Boundary (ambiguous).
class DropRegion {
 public:
  explicit DropRegion(TriMesh closedSurface, double epsGeomFactor = 1e-9);
  Membership classify(const Vec3& p) const;
  double distance(const Vec3& p) const { return bvh_.distance(p); }
  const TriMesh& surface() const { return mesh_; }
  const Bvh& bvh() const { return bvh_; }
  double epsGeom() const { return epsGeom_; }

 private:
  TriMesh mesh_;
  Bvh bvh_;
  double epsGeom_;
};

inline Membership pointInDropRegion(const DropRegion& region, const Vec3& p) {
  return region.classify(p);
}

}  // namespace geom
}  // namespace wedgecmc

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wedgecmc/geom.hpp"

namespace wedgecmc {

Vec3 closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Proper intersection test between two triangles (shared-simplex contact of
// adjacent triangles must be excluded by the caller via index adjacency).
bool triTriIntersect(const Vec3& a0, const Vec3& b0, const Vec3& c0,
                     const Vec3& a1, const Vec3& b1, const Vec3& c1);

// Static AABB tree over a triangle soup.
class Bvh {
 public:
  void build(const Eigen::MatrixXd& V, const Eigen::MatrixXi& F);
  bool empty() const { return nodes_.empty(); }

  struct ClosestHit {
    double dist2 = 0.0;
    Vec3 point = Vec3::Zero();
    int tri = -1;
  };
  ClosestHit closestPoint(const Vec3& p) const;
  double distance(const Vec3& p) const;

  // Parity ray cast. Returns true when the cast is clean (no grazing hits);
  // `inside` then holds the crossing parity.
  bool raycastParity(const Vec3& p, const Vec3& dir, bool& inside) const;

  void overlapQuery(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const;

  const Eigen::MatrixXd& vertices() const { return V_; }
  const Eigen::MatrixXi& faces() const { return F_; }

 private:
  struct Node {
    Vec3 lo, hi;
    int left = -1, right = -1;  // children; leaf when left < 0
    int begin = 0, end = 0;     // leaf triangle range in tris_
  };
  int buildRange(int begin, int end, std::vector<Vec3>& centroids);
  std::vector<Node> nodes_;
  std::vector<int> tris_;
  Eigen::MatrixXd V_;
  Eigen::MatrixXi F_;
  int root_ = -1;
};

}  // namespace wedgecmc

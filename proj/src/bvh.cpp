#include "wedgecmc/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wedgecmc {

Vec3 closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

// Projection interval of a triangle on the intersection line of two planes.
bool intervalOnLine(const double p[3], const double d[3], double& t0, double& t1) {
  auto seg = [&](int alone, int i, int j) {
    t0 = p[alone] + (p[i] - p[alone]) * d[alone] / (d[alone] - d[i]);
    t1 = p[alone] + (p[j] - p[alone]) * d[alone] / (d[alone] - d[j]);
  };
  if (d[0] * d[1] > 0.0) seg(2, 0, 1);
  else if (d[0] * d[2] > 0.0) seg(1, 0, 2);
  else if (d[1] * d[2] > 0.0 || d[0] != 0.0) seg(0, 1, 2);
  else if (d[1] != 0.0) seg(1, 0, 2);
  else if (d[2] != 0.0) seg(2, 0, 1);
  else return false;  // coplanar
  if (t0 > t1) std::swap(t0, t1);
  return true;
}

double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool segmentsCross(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  const double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  const double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

bool pointInTri2d(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                  const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double o1 = orient2d(a, b, p), o2 = orient2d(b, c, p), o3 = orient2d(c, a, p);
  return (o1 >= 0 && o2 >= 0 && o3 >= 0) || (o1 <= 0 && o2 <= 0 && o3 <= 0);
}

bool coplanarTriTri(const Vec3& n, const Vec3 t0[3], const Vec3 t1[3]) {
  int drop = 0;
  n.cwiseAbs().maxCoeff(&drop);
  const int ax = (drop + 1) % 3, ay = (drop + 2) % 3;
  Eigen::Vector2d a[3], b[3];
  for (int i = 0; i < 3; ++i) {
    a[i] = {t0[i][ax], t0[i][ay]};
    b[i] = {t1[i][ax], t1[i][ay]};
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (segmentsCross(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3])) return true;
  if (pointInTri2d(a[0], b[0], b[1], b[2])) return true;
  if (pointInTri2d(b[0], a[0], a[1], a[2])) return true;
  return false;
}

}  // namespace

bool triTriIntersect(const Vec3& a0, const Vec3& b0, const Vec3& c0,
                     const Vec3& a1, const Vec3& b1, const Vec3& c1) {
  const Vec3 t0[3] = {a0, b0, c0};
  const Vec3 t1[3] = {a1, b1, c1};

  const Vec3 n0 = (b0 - a0).cross(c0 - a0);
  const Vec3 n1 = (b1 - a1).cross(c1 - a1);
  const double scale = std::max(n0.norm(), n1.norm());
  const double zeroTol = 1e-13 * std::max(1.0, scale);

  double d1[3], d0[3];
  for (int i = 0; i < 3; ++i) {
    d1[i] = n0.dot(t1[i] - a0);
    if (std::abs(d1[i]) < zeroTol) d1[i] = 0.0;
  }
  if ((d1[0] > 0 && d1[1] > 0 && d1[2] > 0) || (d1[0] < 0 && d1[1] < 0 && d1[2] < 0)) return false;

  for (int i = 0; i < 3; ++i) {
    d0[i] = n1.dot(t0[i] - a1);
    if (std::abs(d0[i]) < zeroTol) d0[i] = 0.0;
  }
  if ((d0[0] > 0 && d0[1] > 0 && d0[2] > 0) || (d0[0] < 0 && d0[1] < 0 && d0[2] < 0)) return false;

  const Vec3 dir = n0.cross(n1);
  int axis = 0;
  dir.cwiseAbs().maxCoeff(&axis);

  double p0[3], p1[3];
  for (int i = 0; i < 3; ++i) {
    p0[i] = t0[i][axis];
    p1[i] = t1[i][axis];
  }
  double s0, s1, u0, u1;
  if (!intervalOnLine(p0, d0, s0, s1)) return coplanarTriTri(n0, t0, t1);
  if (!intervalOnLine(p1, d1, u0, u1)) return coplanarTriTri(n0, t0, t1);

  const double overlap = std::min(s1, u1) - std::max(s0, u0);
  return overlap > 1e-12 * std::max({1.0, std::abs(s0), std::abs(s1), std::abs(u0), std::abs(u1)});
}

void Bvh::build(const Eigen::MatrixXd& V, const Eigen::MatrixXi& F) {
  V_ = V;
  F_ = F;
  nodes_.clear();
  tris_.resize(static_cast<std::size_t>(F.rows()));
  std::iota(tris_.begin(), tris_.end(), 0);
  std::vector<Vec3> centroids(static_cast<std::size_t>(F.rows()));
  for (int t = 0; t < F.rows(); ++t)
    centroids[static_cast<std::size_t>(t)] =
        (V.row(F(t, 0)) + V.row(F(t, 1)) + V.row(F(t, 2))).transpose() / 3.0;
  if (F.rows() > 0) root_ = buildRange(0, static_cast<int>(F.rows()), centroids);
}

int Bvh::buildRange(int begin, int end, std::vector<Vec3>& centroids) {
  Node node;
  node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (int k = begin; k < end; ++k) {
    const int t = tris_[static_cast<std::size_t>(k)];
    for (int j = 0; j < 3; ++j) {
      node.lo = node.lo.cwiseMin(V_.row(F_(t, j)).transpose());
      node.hi = node.hi.cwiseMax(V_.row(F_(t, j)).transpose());
    }
  }
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 8) {
    nodes_[static_cast<std::size_t>(idx)].begin = begin;
    nodes_[static_cast<std::size_t>(idx)].end = end;
    return idx;
  }
  Vec3 clo = Vec3::Constant(std::numeric_limits<double>::infinity()), chi = -clo;
  for (int k = begin; k < end; ++k) {
    const Vec3& c = centroids[static_cast<std::size_t>(tris_[static_cast<std::size_t>(k)])];
    clo = clo.cwiseMin(c);
    chi = chi.cwiseMax(c);
  }
  int axis = 0;
  (chi - clo).maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(tris_.begin() + begin, tris_.begin() + mid, tris_.begin() + end,
                   [&](int a, int b) {
                     return centroids[static_cast<std::size_t>(a)][axis] <
                            centroids[static_cast<std::size_t>(b)][axis];
                   });
  const int l = buildRange(begin, mid, centroids);
  const int r = buildRange(mid, end, centroids);
  nodes_[static_cast<std::size_t>(idx)].left = l;
  nodes_[static_cast<std::size_t>(idx)].right = r;
  return idx;
}

namespace {
double boxDist2(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = std::max({lo[i] - p[i], 0.0, p[i] - hi[i]});
    d2 += d * d;
  }
  return d2;
}
}  // namespace

Bvh::ClosestHit Bvh::closestPoint(const Vec3& p) const {
  ClosestHit best;
  best.dist2 = std::numeric_limits<double>::infinity();
  if (root_ < 0) return best;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const int ni = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(ni)];
    if (boxDist2(p, n.lo, n.hi) >= best.dist2) continue;
    if (n.left < 0) {
      for (int k = n.begin; k < n.end; ++k) {
        const int t = tris_[static_cast<std::size_t>(k)];
        const Vec3 q = closestPointOnTriangle(p, V_.row(F_(t, 0)), V_.row(F_(t, 1)), V_.row(F_(t, 2)));
        const double d2 = (q - p).squaredNorm();
        if (d2 < best.dist2) {
          best.dist2 = d2;
          best.point = q;
          best.tri = t;
        }
      }
    } else {
      // Visit the nearer child first.
      const double dl = boxDist2(p, nodes_[static_cast<std::size_t>(n.left)].lo,
                                 nodes_[static_cast<std::size_t>(n.left)].hi);
      const double dr = boxDist2(p, nodes_[static_cast<std::size_t>(n.right)].lo,
                                 nodes_[static_cast<std::size_t>(n.right)].hi);
      if (dl < dr) {
        stack.push_back(n.right);
        stack.push_back(n.left);
      } else {
        stack.push_back(n.left);
        stack.push_back(n.right);
      }
    }
  }
  return best;
}

double Bvh::distance(const Vec3& p) const { return std::sqrt(closestPoint(p).dist2); }

bool Bvh::raycastParity(const Vec3& p, const Vec3& dir, bool& inside) const {
  if (root_ < 0) {
    inside = false;
    return true;
  }
  const double diag = (nodes_[static_cast<std::size_t>(root_)].hi -
                       nodes_[static_cast<std::size_t>(root_)].lo)
                          .norm();
  const double tEps = 1e-12 * std::max(1.0, diag);
  const double bEps = 1e-10;
  int crossings = 0;
  bool clean = true;

  std::vector<int> stack{root_};
  while (!stack.empty() && clean) {
    const int ni = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(ni)];
    // Slab test for the half-line p + t*dir, t >= 0.
    double tmin = 0.0, tmax = std::numeric_limits<double>::infinity();
    bool miss = false;
    for (int i = 0; i < 3 && !miss; ++i) {
      if (std::abs(dir[i]) < 1e-300) {
        if (p[i] < n.lo[i] - tEps || p[i] > n.hi[i] + tEps) miss = true;
      } else {
        double t1 = (n.lo[i] - p[i]) / dir[i];
        double t2 = (n.hi[i] - p[i]) / dir[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
        if (tmin > tmax + tEps) miss = true;
      }
    }
    if (miss) continue;
    if (n.left >= 0) {
      stack.push_back(n.left);
      stack.push_back(n.right);
      continue;
    }
    for (int k = n.begin; k < n.end && clean; ++k) {
      const int t = tris_[static_cast<std::size_t>(k)];
      const Vec3 a = V_.row(F_(t, 0)), b = V_.row(F_(t, 1)), c = V_.row(F_(t, 2));
      const Vec3 e1 = b - a, e2 = c - a;
      const Vec3 pv = dir.cross(e2);
      const double det = e1.dot(pv);
      const double detScale = e1.norm() * e2.norm();
      if (std::abs(det) < 1e-14 * std::max(1.0, detScale)) {
        // Ray nearly parallel to the triangle plane: only a problem if the
        // triangle actually straddles the ray.
        const Vec3 q = closestPointOnTriangle(p, a, b, c);
        const Vec3 w = q - p;
        const double along = w.dot(dir);
        if (along > 0.0 && (w - along * dir).norm() < 1e-9 * std::max(1.0, diag)) clean = false;
        continue;
      }
      const double invDet = 1.0 / det;
      const Vec3 tv = p - a;
      const double u = tv.dot(pv) * invDet;
      if (u < -bEps || u > 1.0 + bEps) continue;
      const Vec3 qv = tv.cross(e1);
      const double v = dir.dot(qv) * invDet;
      if (v < -bEps || u + v > 1.0 + bEps) continue;
      const double thit = e2.dot(qv) * invDet;
      if (thit < -tEps) continue;
      if (thit <= tEps) {
        clean = false;  // origin effectively on the surface
        continue;
      }
      const bool strictInside =
          u > bEps && v > bEps && (u + v) < 1.0 - bEps;
      if (strictInside) ++crossings;
      else clean = false;  // grazing an edge or vertex
    }
  }
  if (!clean) return false;
  inside = (crossings % 2) == 1;
  return true;
}

void Bvh::overlapQuery(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const {
  out.clear();
  if (root_ < 0) return;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const int ni = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(ni)];
    if ((n.lo.array() > hi.array()).any() || (n.hi.array() < lo.array()).any()) continue;
    if (n.left < 0) {
      for (int k = n.begin; k < n.end; ++k) out.push_back(tris_[static_cast<std::size_t>(k)]);
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
}

}  // namespace wedgecmc

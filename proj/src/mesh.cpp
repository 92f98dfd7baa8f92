#include "wedgecmc/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "wedgecmc/util.hpp"

namespace wedgecmc {

double TriMesh::bboxDiagonal() const {
  if (V.rows() == 0) return 0.0;
  return (V.colwise().maxCoeff() - V.colwise().minCoeff()).norm();
}

namespace {

struct EdgeInfo {
  int count = 0;
  int sameDir = 0;        // directed occurrences matching the key order
  int from = -1, to = -1; // the directed form of a boundary edge
};

inline std::uint64_t edgeKey(int a, int b) {
  const std::uint64_t lo = static_cast<std::uint64_t>(std::min(a, b));
  const std::uint64_t hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

MeshTopology analyzeTopology(const TriMesh& mesh) {
  MeshTopology out;
  out.vertexCount = static_cast<int>(mesh.V.rows());
  out.faceCount = static_cast<int>(mesh.F.rows());

  std::map<std::uint64_t, EdgeInfo> edges;
  for (int f = 0; f < mesh.F.rows(); ++f) {
    for (int j = 0; j < 3; ++j) {
      const int a = mesh.F(f, j), b = mesh.F(f, (j + 1) % 3);
      EdgeInfo& e = edges[edgeKey(a, b)];
      ++e.count;
      if (a < b) ++e.sameDir;
      e.from = a;
      e.to = b;
    }
  }
  out.edgeCount = static_cast<int>(edges.size());
  out.eulerCharacteristic = out.vertexCount - out.edgeCount + out.faceCount;

  std::map<int, int> nextOnBoundary;  // directed boundary edge a -> b
  for (const auto& [key, e] : edges) {
    (void)key;
    if (e.count > 2) out.edgeManifold = false;
    if (e.count == 2 && (e.sameDir == 0 || e.sameDir == 2)) out.orientable = false;
    if (e.count == 1) {
      out.closed = false;
      if (nextOnBoundary.count(e.from)) out.edgeManifold = false;
      nextOnBoundary[e.from] = e.to;
    }
  }

  // Chain boundary edges into loops.
  std::map<int, int> pending = nextOnBoundary;
  while (!pending.empty()) {
    const int start = pending.begin()->first;
    std::vector<int> loop;
    int cur = start;
    while (true) {
      auto it = pending.find(cur);
      if (it == pending.end()) break;  // open chain: non-manifold boundary
      loop.push_back(cur);
      const int nxt = it->second;
      pending.erase(it);
      cur = nxt;
      if (cur == start) break;
    }
    if (loop.size() >= 3 && cur == start) out.boundaryLoops.push_back(std::move(loop));
    else out.edgeManifold = false;
  }

  if (out.vertexCount > 0) {
    UnionFind uf(out.vertexCount);
    for (int f = 0; f < mesh.F.rows(); ++f) {
      uf.unite(mesh.F(f, 0), mesh.F(f, 1));
      uf.unite(mesh.F(f, 0), mesh.F(f, 2));
    }
    const int root = uf.find(0);
    for (int v = 1; v < out.vertexCount && out.connected; ++v)
      if (uf.find(v) != root) out.connected = false;
  }
  return out;
}

TriMesh capBoundaryLoops(const TriMesh& mesh) {
  const MeshTopology topo = analyzeTopology(mesh);
  int extraV = static_cast<int>(topo.boundaryLoops.size());
  int extraF = 0;
  for (const auto& loop : topo.boundaryLoops) extraF += static_cast<int>(loop.size());

  TriMesh out;
  out.V.resize(mesh.V.rows() + extraV, 3);
  out.V.topRows(mesh.V.rows()) = mesh.V;
  out.F.resize(mesh.F.rows() + extraF, 3);
  out.F.topRows(mesh.F.rows()) = mesh.F;
  if (mesh.hasNormals()) {
    out.N.resize(out.V.rows(), 3);
    out.N.topRows(mesh.N.rows()) = mesh.N;
  }

  int vc = static_cast<int>(mesh.V.rows());
  int fc = static_cast<int>(mesh.F.rows());
  for (const auto& loop : topo.boundaryLoops) {
    Vec3 centroid = Vec3::Zero();
    for (int v : loop) centroid += mesh.V.row(v).transpose();
    centroid /= static_cast<double>(loop.size());
    out.V.row(vc) = centroid.transpose();
    if (out.N.rows() > 0) {
      // Newell plane normal of the loop; the cap is planar for our closures.
      Vec3 nw = Vec3::Zero();
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec3 p = mesh.V.row(loop[i]).transpose();
        const Vec3 q = mesh.V.row(loop[(i + 1) % loop.size()]).transpose();
        nw += p.cross(q);
      }
      const double nn = nw.norm();
      const Vec3 capN = nn > 0 ? Vec3(nw / nn) : Vec3(Vec3::UnitZ());
      out.N.row(vc) = capN.transpose();
    }
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i], b = loop[(i + 1) % loop.size()];
      // Boundary edges run a->b in the surface; caps traverse b->a.
      out.F.row(fc++) << b, a, vc;
    }
    ++vc;
  }
  return out;
}

int selfIntersectionCount(const TriMesh& mesh) {
  Bvh bvh;
  bvh.build(mesh.V, mesh.F);
  const int nf = static_cast<int>(mesh.F.rows());
  std::atomic<int> total{0};
  parallelFor(static_cast<std::size_t>(nf), [&](std::size_t lo, std::size_t hi) {
    std::vector<int> cand;
    int local = 0;
    for (std::size_t tt = lo; tt < hi; ++tt) {
      const int t = static_cast<int>(tt);
      Vec3 blo = Vec3::Constant(std::numeric_limits<double>::infinity()), bhi = -blo;
      for (int j = 0; j < 3; ++j) {
        blo = blo.cwiseMin(mesh.V.row(mesh.F(t, j)).transpose());
        bhi = bhi.cwiseMax(mesh.V.row(mesh.F(t, j)).transpose());
      }
      bvh.overlapQuery(blo, bhi, cand);
      for (int s : cand) {
        if (s <= t) continue;
        bool adjacent = false;
        for (int j = 0; j < 3 && !adjacent; ++j)
          for (int k = 0; k < 3; ++k)
            if (mesh.F(t, j) == mesh.F(s, k)) {
              adjacent = true;
              break;
            }
        if (adjacent) continue;
        if (triTriIntersect(mesh.V.row(mesh.F(t, 0)), mesh.V.row(mesh.F(t, 1)),
                            mesh.V.row(mesh.F(t, 2)), mesh.V.row(mesh.F(s, 0)),
                            mesh.V.row(mesh.F(s, 1)), mesh.V.row(mesh.F(s, 2))))
          ++local;
      }
    }
    total += local;
  });
  return total.load();
}

namespace geom {

namespace {
// Fixed direction table so membership queries are deterministic.
const std::vector<Vec3>& castDirections() {
  static const std::vector<Vec3> dirs = [] {
    std::vector<Vec3> d;
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    auto next = [&s]() {
      s ^= s << 13;
      s ^= s >> 7;
      s ^= s << 17;
      return static_cast<double>(s % 2000003) / 2000003.0;
    };
    while (d.size() < 16) {
      Vec3 v(2 * next() - 1, 2 * next() - 1, 2 * next() - 1);
      const double n = v.norm();
      if (n > 0.2 && n < 1.0) d.push_back(v / n);
    }
    return d;
  }();
  return dirs;
}
}  // namespace

DropRegion::DropRegion(TriMesh closedSurface, double epsGeomFactor)
    : mesh_(std::move(closedSurface)) {
  const MeshTopology topo = analyzeTopology(mesh_);
  if (!topo.closed || !topo.edgeManifold)
    throw std::runtime_error("open surface: drop region requires a watertight closure");
  bvh_.build(mesh_.V, mesh_.F);
  epsGeom_ = epsGeomFactor * mesh_.bboxDiagonal();
}

Membership DropRegion::classify(const Vec3& p) const {
  if (bvh_.distance(p) < epsGeom_) return Membership::Boundary;
  for (const Vec3& d : castDirections()) {
    bool inside = false;
    if (bvh_.raycastParity(p, d, inside)) return inside ? Membership::Inside : Membership::Outside;
  }
  return Membership::Boundary;  // every cast grazed: treat as ambiguous
}

}  // namespace geom
}  // namespace wedgecmc

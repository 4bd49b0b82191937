#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rif/prng.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Lattice Z^d (d = 3 or 4), one-coordinate-at-a-time simple walk.
// ---------------------------------------------------------------------------

struct LatticeVertex {
  std::array<int32_t, 4> c{0, 0, 0, 0};
  friend bool operator==(const LatticeVertex& x, const LatticeVertex& y) { return x.c == y.c; }
  friend bool operator!=(const LatticeVertex& x, const LatticeVertex& y) { return !(x == y); }
  friend bool operator<(const LatticeVertex& x, const LatticeVertex& y) { return x.c < y.c; }
};

class Lattice {
 public:
  using Vertex = LatticeVertex;

  explicit Lattice(int dim) : d_(dim) {
    if (dim < 3 || dim > 4) throw std::invalid_argument("lattice dimension must be 3 or 4");
  }

  int dim() const { return d_; }
  int degree() const { return 2 * d_; }
  Vertex origin() const { return Vertex{}; }
  bool bipartite() const { return true; }

  // Neighbor k: +e_j for k=2j, -e_j for k=2j+1.
  Vertex neighbor(const Vertex& v, int k) const {
    Vertex w = v;
    w.c[k >> 1] += (k & 1) ? -1 : +1;
    return w;
  }

  int64_t distance(const Vertex& u, const Vertex& v) const {
    int64_t s = 0;
    for (int j = 0; j < d_; ++j) s += std::abs(static_cast<int64_t>(u.c[j]) - v.c[j]);
    return s;
  }

  // Stream identity; the optional shift realizes a translated random field
  // (streams reindexed by gamma^{-1}) for equivariance runs.
  VertexKey key(const Vertex& v) const {
    const auto u = [](int32_t x) { return static_cast<uint64_t>(static_cast<uint32_t>(x)); };
    Vertex w = v;
    for (int j = 0; j < d_; ++j) w.c[j] -= shift_.c[j];
    return VertexKey{(u(w.c[0]) << 32) | u(w.c[1]), (u(w.c[2]) << 32) | u(w.c[3])};
  }

  void set_stream_shift(const Vertex& s) { shift_ = s; }

  Vertex translate(const Vertex& v, const Vertex& shift) const {
    Vertex w = v;
    for (int j = 0; j < d_; ++j) w.c[j] += shift.c[j];
    return w;
  }

  std::string name() const { return "z" + std::to_string(d_); }

 private:
  int d_;
  Vertex shift_{};
};

inline LatticeVertex lattice_shift(const LatticeVertex& v, const LatticeVertex& s, int sign = 1) {
  LatticeVertex w = v;
  for (int j = 0; j < 4; ++j) w.c[j] += sign * s.c[j];
  return w;
}

// ---------------------------------------------------------------------------
// d-regular tree with a distinguished end xi, materialized lazily. Every node
// has one parent (toward xi, height +1) and d-1 children. Node identities are
// arena indices; canonical stream keys are path hashes, independent of the
// order in which nodes happen to be materialized.
// ---------------------------------------------------------------------------

class TreeSpace {
 public:
  using Vertex = uint32_t;
  static constexpr int kMaxChildren = 7;

  explicit TreeSpace(int deg) : d_(deg) {
    if (deg < 3 || deg > 8) throw std::invalid_argument("tree degree must be in [3,8]");
    Node o;
    o.parent = kNone;
    o.h = 0;
    o.ka = detail::splitmix64(0x6f726967u);
    o.kb = detail::splitmix64(o.ka ^ 0x746f7001u);
    nodes_.push_back(o);
    spine_.push_back(0);
  }

  int deg() const { return d_; }
  int nchildren() const { return d_ - 1; }
  Vertex origin() const { return 0; }
  size_t size() const { return nodes_.size(); }

  int32_t height(Vertex v) const { return nodes_[v].h; }

  Vertex parent(Vertex v) {
    Node& n = nodes_[v];
    if (n.parent != kNone) return n.parent;
    // v is the current top of the spine; extend it.
    const int32_t a = n.h + 1;
    Node p;
    p.parent = kNone;
    p.h = a;
    p.ka = detail::splitmix64(0x7370696eu + static_cast<uint64_t>(a) * 0x9E3779B97F4A7C15ull);
    p.kb = detail::splitmix64(p.ka ^ (0x746f7001u + a));
    const Vertex pid = static_cast<Vertex>(nodes_.size());
    nodes_.push_back(p);
    spine_.push_back(pid);
    // v becomes the spine child of pid (reserved slot kMaxChildren-? use slot 0 convention below)
    nodes_[pid].child[spine_child_slot()] = v + 1;  // +1: 0 means unmaterialized
    nodes_[v].parent = pid;
    nodes_[v].child_index = spine_child_slot();
    return pid;
  }

  // Children are indexed 0..d-2 in canonical order; for spine nodes above the
  // origin, slot d-2 is the next spine node (materialized via parent()).
  Vertex child(Vertex v, int k) {
    Node& n = nodes_[v];
    assert(k >= 0 && k < nchildren());
    if (n.child[k] != 0) return n.child[k] - 1;
    Node c;
    c.parent = v;
    c.child_index = static_cast<uint8_t>(k);
    c.h = n.h - 1;
    c.ka = detail::splitmix64(n.ka ^ (0xC2B2AE3D27D4EB4Full * (static_cast<uint64_t>(k) + 2)));
    c.kb = detail::splitmix64(n.kb ^ (0x165667B19E3779F9ull * (static_cast<uint64_t>(k) + 2)));
    const Vertex cid = static_cast<Vertex>(nodes_.size());
    nodes_.push_back(c);
    nodes_[v].child[k] = cid + 1;
    return cid;
  }

  VertexKey key(Vertex v) const { return VertexKey{nodes_[v].ka, nodes_[v].kb}; }

  // Tree distance via ancestor climb.
  int64_t tree_distance(Vertex u, Vertex v) {
    int64_t dist = 0;
    while (u != v) {
      if (height(u) < height(v)) {
        u = parent(u);
        ++dist;
      } else if (height(v) < height(u)) {
        v = parent(v);
        ++dist;
      } else {
        u = parent(u);
        v = parent(v);
        dist += 2;
      }
    }
    return dist;
  }

  // Grandchild (two steps away from xi).
  Vertex grandchild(Vertex v, int k1, int k2) { return child(child(v, k1), k2); }

  Vertex grandparent2(Vertex v) { return parent(parent(v)); }

  bool is_child_of(Vertex c, Vertex p) const {
    return nodes_[c].parent == p;
  }

  uint8_t child_index(Vertex v) const { return nodes_[v].child_index; }

 private:
  int spine_child_slot() const { return d_ - 2; }

  static constexpr Vertex kNone = 0xFFFFFFFFu;
  struct Node {
    Vertex parent = kNone;
    uint8_t child_index = 0;
    int32_t h = 0;
    uint64_t ka = 0, kb = 0;
    std::array<Vertex, kMaxChildren> child{};  // 0 = unmaterialized, else id+1
  };
  int d_;
  std::vector<Node> nodes_;
  std::vector<Vertex> spine_;
};

// d-regular tree graph view over a TreeSpace.
class RegularTree {
 public:
  using Vertex = TreeSpace::Vertex;

  explicit RegularTree(int deg) : space_(deg) {}

  int degree() const { return space_.deg(); }
  Vertex origin() const { return space_.origin(); }
  bool bipartite() const { return true; }

  // Neighbor 0 is the parent (toward xi); 1..d-1 are the children.
  Vertex neighbor(const Vertex& v, int k) {
    if (k == 0) return space_.parent(v);
    return space_.child(v, k - 1);
  }

  int64_t distance(const Vertex& u, const Vertex& v) { return space_.tree_distance(u, v); }
  VertexKey key(const Vertex& v) const { return space_.key(v); }
  int32_t height(const Vertex& v) const { return space_.height(v); }
  TreeSpace& space() { return space_; }
  std::string name() const { return "tree" + std::to_string(degree()); }

 private:
  TreeSpace space_;
};

// Grandparent graph: tree edges plus an edge from each vertex to its
// grandparent toward xi (hence to its (d-1)^2 grandchildren). The standard
// transitive non-unimodular family.
class Grandparent {
 public:
  using Vertex = TreeSpace::Vertex;

  explicit Grandparent(int tree_deg) : d_(tree_deg), space_(tree_deg) {}

  int tree_deg() const { return d_; }
  int degree() const { return d_ + 1 + (d_ - 1) * (d_ - 1); }
  Vertex origin() const { return space_.origin(); }
  bool bipartite() const { return false; }

  // Order: parent, children 0..d-2, grandparent, grandchildren (lex pairs).
  Vertex neighbor(const Vertex& v, int k) {
    const int nc = d_ - 1;
    if (k == 0) return space_.parent(v);
    if (k <= nc) return space_.child(v, k - 1);
    if (k == nc + 1) return space_.grandparent2(v);
    const int g = k - nc - 2;
    return space_.grandchild(v, g / nc, g % nc);
  }

  // Bounded BFS; grandparent edges shorten tree paths.
  int64_t distance(const Vertex& u, const Vertex& v) {
    if (u == v) return 0;
    std::unordered_map<Vertex, int> seen{{u, 0}};
    std::deque<Vertex> q{u};
    while (!q.empty()) {
      const Vertex x = q.front();
      q.pop_front();
      const int dx = seen[x];
      for (int k = 0; k < degree(); ++k) {
        const Vertex y = neighbor(x, k);
        if (y == v) return dx + 1;
        if (seen.emplace(y, dx + 1).second) q.push_back(y);
      }
      if (seen.size() > 2000000) throw std::runtime_error("grandparent distance: search too large");
    }
    return -1;
  }

  VertexKey key(const Vertex& v) const { return space_.key(v); }
  int32_t height(const Vertex& v) const { return space_.height(v); }

  // mu(x)/mu(y) = (d-1)^(h(x)-h(y)); validated against stabilizer orbits.
  double mu_ratio(const Vertex& x, const Vertex& y) const {
    return std::pow(static_cast<double>(d_ - 1), height(x) - height(y));
  }

  TreeSpace& space() { return space_; }
  std::string name() const { return "gp" + std::to_string(d_); }

 private:
  int d_;
  TreeSpace space_;
};

// ---------------------------------------------------------------------------
// Windows: finite vertex enumerations with O(1) membership/indexing. Lattice
// windows are boxes (|x_j - c_j| <= R); tree windows are graph balls.
// ---------------------------------------------------------------------------

class LatticeWindow {
 public:
  using Vertex = LatticeVertex;

  LatticeWindow(const Lattice& g, Vertex center, int radius)
      : d_(g.dim()), center_(center), r_(radius), side_(2 * radius + 1) {
    size_ = 1;
    for (int j = 0; j < d_; ++j) size_ *= static_cast<size_t>(side_);
  }

  size_t size() const { return size_; }
  int radius() const { return r_; }
  const Vertex& center() const { return center_; }

  bool contains(const Vertex& v) const {
    for (int j = 0; j < d_; ++j)
      if (std::abs(v.c[j] - center_.c[j]) > r_) return false;
    return true;
  }

  // Lexicographic index in center-relative coordinates (translation covariant).
  size_t index(const Vertex& v) const {
    size_t idx = 0;
    for (int j = 0; j < d_; ++j) idx = idx * side_ + static_cast<size_t>(v.c[j] - center_.c[j] + r_);
    return idx;
  }

  Vertex vertex(size_t idx) const {
    Vertex v = center_;
    for (int j = d_ - 1; j >= 0; --j) {
      v.c[j] += static_cast<int32_t>(idx % side_) - r_;
      idx /= side_;
    }
    return v;
  }

  bool inner(const Vertex& v, int inner_radius) const {
    for (int j = 0; j < d_; ++j)
      if (std::abs(v.c[j] - center_.c[j]) > inner_radius) return false;
    return true;
  }

 private:
  int d_;
  Vertex center_;
  int r_;
  int side_;
  size_t size_;
};

// Graph-ball window for tree-like families (BFS enumeration).
template <class G>
class BallWindow {
 public:
  using Vertex = typename G::Vertex;

  BallWindow(G& g, Vertex center, int radius) : center_(center), r_(radius) {
    verts_.push_back(center);
    depth_.push_back(0);
    idx_[center] = 0;
    size_t head = 0;
    while (head < verts_.size()) {
      const Vertex x = verts_[head];
      const int dx = depth_[head];
      ++head;
      if (dx == radius) continue;
      for (int k = 0; k < g.degree(); ++k) {
        const Vertex y = g.neighbor(x, k);
        if (idx_.emplace(y, verts_.size()).second) {
          verts_.push_back(y);
          depth_.push_back(dx + 1);
        }
      }
    }
  }

  size_t size() const { return verts_.size(); }
  int radius() const { return r_; }
  const Vertex& center() const { return center_; }
  const std::vector<Vertex>& vertices() const { return verts_; }

  bool contains(const Vertex& v) const { return idx_.count(v) != 0; }

  size_t index(const Vertex& v) const {
    auto it = idx_.find(v);
    assert(it != idx_.end());
    return it->second;
  }

  Vertex vertex(size_t i) const { return verts_[i]; }
  int depth(size_t i) const { return depth_[i]; }

  bool inner(const Vertex& v, int inner_radius) const {
    auto it = idx_.find(v);
    return it != idx_.end() && depth_[it->second] <= inner_radius;
  }

 private:
  Vertex center_;
  int r_;
  std::vector<Vertex> verts_;
  std::vector<int> depth_;
  std::unordered_map<Vertex, size_t> idx_;
};

template <class G>
struct WindowOf;

template <>
struct WindowOf<Lattice> {
  using type = LatticeWindow;
};
template <>
struct WindowOf<RegularTree> {
  using type = BallWindow<RegularTree>;
};
template <>
struct WindowOf<Grandparent> {
  using type = BallWindow<Grandparent>;
};

template <class G>
using Window = typename WindowOf<G>::type;

inline LatticeWindow make_window(const Lattice& g, LatticeVertex c, int r) { return LatticeWindow(g, c, r); }
inline BallWindow<RegularTree> make_window(RegularTree& g, TreeSpace::Vertex c, int r) {
  return BallWindow<RegularTree>(g, c, r);
}
inline BallWindow<Grandparent> make_window(Grandparent& g, TreeSpace::Vertex c, int r) {
  return BallWindow<Grandparent>(g, c, r);
}

}  // namespace rif

template <>
struct std::hash<rif::LatticeVertex> {
  size_t operator()(const rif::LatticeVertex& v) const noexcept {
    const auto u = [](int32_t x) { return static_cast<uint64_t>(static_cast<uint32_t>(x)); };
    uint64_t h = rif::detail::splitmix64((u(v.c[0]) << 32) | u(v.c[1]));
    h = rif::detail::splitmix64(h ^ ((u(v.c[2]) << 32) | u(v.c[3])));
    return static_cast<size_t>(h);
  }
};

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "rif/fli.hpp"
#include "rif/graph.hpp"
#include "rif/walk.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Mass-transport diagnostics. Transport functions are given in the invariant
// parameterization of the family (displacement on the lattice, distance on
// the regular tree, up/down geodesic type on the grandparent graph), so they
// are automorphism-invariant by construction.
// ---------------------------------------------------------------------------

struct TransportSums {
  double sent = 0.0;
  double received = 0.0;
  double tilted_received = 0.0;  // weights mu(x)/mu(o)
};

struct LatticeTransport {
  std::map<std::array<int32_t, 4>, double> w;
  int radius = 0;
  double operator()(const Lattice& g, const LatticeVertex& x, const LatticeVertex& y) const {
    std::array<int32_t, 4> d{};
    for (int j = 0; j < g.dim(); ++j) d[j] = y.c[j] - x.c[j];
    auto it = w.find(d);
    return it == w.end() ? 0.0 : it->second;
  }
};

struct TreeDistTransport {
  std::map<int64_t, double> w;
  int radius = 0;
  template <class G>
  double operator()(G& g, typename G::Vertex x, typename G::Vertex y) const {
    auto it = w.find(g.space().tree_distance(x, y));
    return it == w.end() ? 0.0 : it->second;
  }
};

// Geodesic type of (x,y) in the xi-rooted tree: a steps up, b steps down.
inline std::pair<int, int> updown_type(TreeSpace& s, TreeSpace::Vertex x, TreeSpace::Vertex y) {
  const int64_t d = s.tree_distance(x, y);
  const int64_t dh = s.height(y) - s.height(x);
  return {static_cast<int>((d + dh) / 2), static_cast<int>((d - dh) / 2)};
}

struct GpTransport {
  std::map<std::pair<int, int>, double> w;
  int radius = 0;
  double operator()(Grandparent& g, TreeSpace::Vertex x, TreeSpace::Vertex y) const {
    auto it = w.find(updown_type(g.space(), x, y));
    return it == w.end() ? 0.0 : it->second;
  }
};

template <class G, class Transport>
TransportSums mass_transport_sums(G& g, const Transport& f, const typename G::Vertex& o, int radius) {
  if (f.radius > radius) throw std::invalid_argument("transport support exceeds the enumeration radius");
  TransportSums s;
  auto win = make_window(g, o, radius);
  for (size_t i = 0; i < win.size(); ++i) {
    const auto y = win.vertex(i);
    s.sent += f(g, o, y);
    const double r = f(g, y, o);
    s.received += r;
    if constexpr (std::is_same_v<G, Grandparent>) {
      s.tilted_received += r * g.mu_ratio(y, o);
    } else {
      s.tilted_received += r;  // mu constant on unimodular families
    }
  }
  return s;
}

// Average of ln(mu(x)/mu(o)) over the neighbours; strictly negative exactly
// when the family is non-unimodular.
template <class G>
double modular_drift(G& g) {
  if constexpr (std::is_same_v<G, Grandparent>) {
    const auto o = g.origin();
    double s = 0.0;
    for (int k = 0; k < g.degree(); ++k)
      s += (g.height(g.neighbor(o, k)) - g.height(o)) * std::log(static_cast<double>(g.tree_deg() - 1));
    return s / g.degree();
  } else {
    return 0.0;
  }
}

// ---------------------------------------------------------------------------
// Stabilizer orbit ratio |S(x)y| / |S(y)x| on the grandparent graph: closed
// form from the up/down type, cross-checked by generator closure (sibling
// subtree swaps fixing x) at small depth.
// ---------------------------------------------------------------------------

inline double gp_orbit_size(int d, int a, int b) {
  if (b == 0) return 1.0;
  if (a == 0) return std::pow(static_cast<double>(d - 1), b);
  return (d - 2) * std::pow(static_cast<double>(d - 1), b - 1);
}

inline double orbit_ratio(Grandparent& g, TreeSpace::Vertex x, TreeSpace::Vertex y) {
  const auto [a, b] = updown_type(g.space(), x, y);
  return gp_orbit_size(g.tree_deg(), a, b) / gp_orbit_size(g.tree_deg(), b, a);
}

// Exhaustive orbit of y under the xi-fixing stabilizer of x, via closure
// under sibling-branch swaps that fix x (these generate the stabilizer).
inline std::set<TreeSpace::Vertex> gp_orbit_brute(Grandparent& g, TreeSpace::Vertex x,
                                                  TreeSpace::Vertex y, int climb_cap = 16) {
  TreeSpace& s = g.space();
  const int nc = g.tree_deg() - 1;
  auto strictly_below = [&](TreeSpace::Vertex v, TreeSpace::Vertex anc) {
    if (s.height(v) >= s.height(anc)) return false;
    while (s.height(v) < s.height(anc)) v = s.parent(v);
    return v == anc;
  };
  std::set<TreeSpace::Vertex> orbit{y};
  std::vector<TreeSpace::Vertex> queue{y};
  while (!queue.empty()) {
    const auto cur = queue.back();
    queue.pop_back();
    auto node = cur;
    std::vector<uint8_t> word;  // letters from the pivot's branch root down to cur
    for (int up = 0; up < climb_cap; ++up) {
      const auto pivot = s.parent(node);
      word.push_back(s.child_index(node));
      const auto own = s.child(pivot, word.back());
      for (int c = 0; c < nc; ++c) {
        if (c == static_cast<int>(word.back())) continue;
        const auto sib = s.child(pivot, c);
        // the swap must fix x: x may not sit inside either swapped branch
        if (strictly_below(x, own) || x == own || strictly_below(x, sib) || x == sib) continue;
        auto img = sib;
        for (auto it = word.rbegin() + 1; it != word.rend(); ++it) img = s.child(img, *it);
        if (orbit.insert(img).second) queue.push_back(img);
      }
      node = pivot;
    }
  }
  return orbit;
}

// ---------------------------------------------------------------------------
// Rooting map on the grandparent graph: first global mu-maximum along a
// truncated double walk; unresolved when the maximum touches the final 20%
// of either horizon.
// ---------------------------------------------------------------------------

struct RootResult {
  bool resolved = false;
  int64_t index = 0;  // position in [-s_bwd, s_fwd] of the chosen root
};

template <class G>
RootResult root_map(G& g, const Traj<typename G::Vertex>& bwd, const Traj<typename G::Vertex>& fwd) {
  // heights along the doubly-indexed path
  const int64_t sb = static_cast<int64_t>(bwd.steps.size());
  const int64_t sf = static_cast<int64_t>(fwd.steps.size());
  std::vector<int32_t> h(sb + sf + 1);
  {
    auto vb = traj_vertices(g, bwd);
    for (int64_t i = 0; i <= sb; ++i) h[sb - i] = g.height(vb[i]);
    auto vf = traj_vertices(g, fwd);
    for (int64_t i = 0; i <= sf; ++i) h[sb + i] = g.height(vf[i]);
  }
  int32_t hmax = h[0];
  for (auto v : h) hmax = std::max(hmax, v);
  int64_t first = -1;
  for (int64_t n = 0; n < static_cast<int64_t>(h.size()); ++n)
    if (h[n] == hmax) {
      first = n;
      break;
    }
  RootResult r;
  r.index = first - sb;
  // unresolved if the maximum touches the final 20% of either horizon
  bool touched = false;
  for (int64_t n = 0; n < static_cast<int64_t>(h.size()); ++n) {
    if (h[n] != hmax) continue;
    const int64_t pi = n - sb;  // path index in [-sb, sf]
    if (pi < -(4 * sb) / 5 || pi > (4 * sf) / 5) touched = true;
  }
  r.resolved = !touched;
  return r;
}

}  // namespace rif

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rif/graph.hpp"
#include "rif/prng.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Greedy factor-of-iid charts: walk the reference ball in breadth-first order
// and send each next reference vertex to the orbit element with the smallest
// vertex label. Depth-truncated; implemented for the lattice (signed
// permutations x translations) and the regular tree.
// ---------------------------------------------------------------------------

template <class V>
struct Chart {
  std::vector<V> ref;  // reference-ball vertices, BFS order from the root
  std::vector<V> img;  // their images; img[0] is the base vertex x
};

namespace detail {

// signed permutation matrices of Z^d as (perm, sign) pairs
struct SignedPerm {
  std::array<int, 4> perm{0, 1, 2, 3};
  std::array<int, 4> sign{1, 1, 1, 1};

  LatticeVertex apply(const LatticeVertex& z, int d) const {
    LatticeVertex out{};
    for (int j = 0; j < d; ++j) out.c[j] = sign[j] * z.c[perm[j]];
    return out;
  }
};

inline std::vector<SignedPerm> all_signed_perms(int d) {
  std::vector<SignedPerm> out;
  std::array<int, 4> p{0, 1, 2, 3};
  std::sort(p.begin(), p.begin() + d);
  do {
    for (int mask = 0; mask < (1 << d); ++mask) {
      SignedPerm sp;
      sp.perm = p;
      for (int j = 0; j < d; ++j) sp.sign[j] = (mask >> j) & 1 ? -1 : 1;
      out.push_back(sp);
    }
  } while (std::next_permutation(p.begin(), p.begin() + d));
  return out;
}

}  // namespace detail

// Lattice chart: the consistent automorphisms are translations composed with
// signed coordinate permutations; ties in the labels raise.
template <class LabelFn>
Chart<LatticeVertex> greedy_chart(const Lattice& g, LabelFn label, const LatticeVertex& x, int depth) {
  const int d = g.dim();
  Chart<LatticeVertex> ch;
  // reference ball in BFS order (deterministic neighbor order)
  LatticeWindow box(g, g.origin(), depth);
  std::vector<LatticeVertex> order;
  std::vector<uint8_t> seen(box.size(), 0);
  order.push_back(g.origin());
  seen[box.index(g.origin())] = 1;
  for (size_t head = 0; head < order.size(); ++head) {
    const auto v = order[head];
    for (int k = 0; k < g.degree(); ++k) {
      const auto w = g.neighbor(v, k);
      if (g.distance(g.origin(), w) > depth) continue;
      if (!seen[box.index(w)]) {
        seen[box.index(w)] = 1;
        order.push_back(w);
      }
    }
  }
  auto perms = detail::all_signed_perms(d);
  std::vector<uint8_t> ok(perms.size(), 1);
  ch.ref = order;
  ch.img.resize(order.size());
  ch.img[0] = x;
  for (size_t n = 1; n < order.size(); ++n) {
    // orbit of order[n] under the surviving automorphisms
    std::vector<LatticeVertex> orbit;
    for (size_t a = 0; a < perms.size(); ++a) {
      if (!ok[a]) continue;
      auto cand = g.translate(perms[a].apply(order[n], d), x);
      bool dup = false;
      for (const auto& o : orbit)
        if (o == cand) dup = true;
      if (!dup) orbit.push_back(cand);
    }
    double best = std::numeric_limits<double>::infinity();
    LatticeVertex pick{};
    for (const auto& cand : orbit) {
      const double u = label(cand);
      if (u == best) throw std::runtime_error("greedy chart: label tie");
      if (u < best) {
        best = u;
        pick = cand;
      }
    }
    ch.img[n] = pick;
    for (size_t a = 0; a < perms.size(); ++a) {
      if (!ok[a]) continue;
      if (!(g.translate(perms[a].apply(order[n], d), x) == pick)) ok[a] = 0;
    }
  }
  return ch;
}

// Tree chart: each BFS vertex hangs off a pinned parent; its orbit is the set
// of unused neighbors of the parent's image.
template <class LabelFn>
Chart<TreeSpace::Vertex> greedy_chart(RegularTree& g, LabelFn label, TreeSpace::Vertex x, int depth) {
  Chart<TreeSpace::Vertex> ch;
  BallWindow<RegularTree> ball(g, g.origin(), depth);
  // BFS enumeration is exactly the window order
  const auto& order = ball.vertices();
  ch.ref = order;
  ch.img.resize(order.size());
  ch.img[0] = x;
  std::vector<int64_t> parent_of(order.size(), -1);
  for (size_t n = 1; n < order.size(); ++n) {
    for (int k = 0; k < g.degree(); ++k) {
      const auto w = g.neighbor(order[n], k);
      if (ball.contains(w) && ball.index(w) < n) {
        parent_of[n] = static_cast<int64_t>(ball.index(w));
        break;  // unique in a tree
      }
    }
    if (parent_of[n] < 0) throw std::logic_error("tree BFS parent missing");
  }
  std::vector<std::vector<TreeSpace::Vertex>> used(order.size());
  for (size_t n = 1; n < order.size(); ++n) {
    const auto pimg = ch.img[static_cast<size_t>(parent_of[n])];
    double best = std::numeric_limits<double>::infinity();
    TreeSpace::Vertex pick{};
    for (int k = 0; k < g.degree(); ++k) {
      const auto cand = g.neighbor(pimg, k);
      bool taken = false;
      for (const auto& u : used[static_cast<size_t>(parent_of[n])])
        if (u == cand) taken = true;
      // the parent's own image-parent is also taken (edge back into the chart)
      if (parent_of[n] > 0) {
        const auto gp = ch.img[static_cast<size_t>(parent_of[static_cast<size_t>(parent_of[n])])];
        if (cand == gp) taken = true;
      }
      if (taken) continue;
      const double u = label(cand);
      if (u == best) throw std::runtime_error("greedy chart: label tie");
      if (u < best) {
        best = u;
        pick = cand;
      }
    }
    ch.img[n] = pick;
    used[static_cast<size_t>(parent_of[n])].push_back(pick);
  }
  return ch;
}

// Adjacency-preservation check: the chart restricted to its domain is a graph
// isomorphism of depth-D balls.
template <class G, class V>
bool chart_is_isomorphism(G& g, const Chart<V>& ch) {
  for (size_t i = 0; i < ch.ref.size(); ++i)
    for (size_t j = i + 1; j < ch.ref.size(); ++j) {
      const bool adj_ref = g.distance(ch.ref[i], ch.ref[j]) == 1;
      const bool adj_img = g.distance(ch.img[i], ch.img[j]) == 1;
      if (adj_ref != adj_img) return false;
    }
  // injectivity
  for (size_t i = 0; i < ch.img.size(); ++i)
    for (size_t j = i + 1; j < ch.img.size(); ++j)
      if (ch.img[i] == ch.img[j]) return false;
  return true;
}

template <class G>
std::function<double(const typename G::Vertex&)> field_labels(const G& g, const Field& f) {
  return [&](const typename G::Vertex& v) { return f.u01(Lane::AtlasU, g.key(v), 0); };
}

}  // namespace rif

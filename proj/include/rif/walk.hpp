#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rif/graph.hpp"
#include "rif/kernel.hpp"
#include "rif/prng.hpp"

namespace rif {

// A nearest-neighbour trajectory stored as (start, neighbor-index steps).
// The encoding is translation-covariant and memory-light; vertices are
// rebuilt on demand.
template <class V>
struct Traj {
  V start{};
  V end{};
  std::vector<uint8_t> steps;

  size_t length() const { return steps.size() + 1; }  // number of vertices
};

template <class G>
std::vector<typename G::Vertex> traj_vertices(G& g, const Traj<typename G::Vertex>& w) {
  std::vector<typename G::Vertex> out;
  out.reserve(w.steps.size() + 1);
  out.push_back(w.start);
  typename G::Vertex cur = w.start;
  for (uint8_t k : w.steps) {
    cur = g.neighbor(cur, k);
    out.push_back(cur);
  }
  return out;
}

// Simple random walk of `nsteps` steps from x. All randomness is keyed by
// (lane, start vertex, occurrence), so a key reproduces its trajectory.
template <class G>
Traj<typename G::Vertex> sample_srw(G& g, const Field& f, const typename G::Vertex& x, int nsteps,
                                    Lane lane, uint64_t occ) {
  Traj<typename G::Vertex> w;
  w.start = x;
  w.steps.reserve(nsteps);
  const VertexKey key = g.key(x);
  typename G::Vertex cur = x;
  for (int t = 0; t < nsteps; ++t) {
    const uint8_t k = static_cast<uint8_t>(f.pick(lane, key, pack_idx(occ, t), g.degree()));
    w.steps.push_back(k);
    cur = g.neighbor(cur, k);
  }
  w.end = cur;
  return w;
}

// ---------------------------------------------------------------------------
// Bridges: walk conditioned to sit at y after L steps, sampled sequentially
// with the step law p_1(cur,z) p_{m-1}(z,y) / p_m(cur,y).
// ---------------------------------------------------------------------------

// Z^d bridge: allocate step counts per coordinate (conditioned on the
// endpoint), run independent 1D bridges, interleave uniformly. Exact, and no
// dense d-dimensional kernel is needed.
inline Traj<LatticeVertex> lattice_bridge(const Lattice& g, const LatticeKernel& kern, const Field& f,
                                          const LatticeVertex& x, const LatticeVertex& y, int L,
                                          uint64_t occ) {
  const int d = g.dim();
  std::array<int32_t, 4> delta{};
  int64_t l1 = 0;
  for (int j = 0; j < d; ++j) {
    delta[j] = y.c[j] - x.c[j];
    l1 += std::abs(delta[j]);
  }
  if (l1 > L || ((l1 ^ static_cast<int64_t>(L)) & 1)) throw std::invalid_argument("bridge endpoint infeasible");
  const Walk1D& w1 = kern.walk1d();
  const VertexKey key = g.key(x);

  struct Cand {
    std::array<int, 4> n;
    double w;
  };
  std::vector<Cand> cands;
  double total = 0.0;
  auto push = [&](std::array<int, 4> n, double w) {
    if (w > 0.0) {
      cands.push_back({n, w});
      total += w;
    }
  };
  if (d == 3) {
    for (int n1 = std::abs(delta[0]); n1 <= L; n1 += 2) {
      const double a = binom_pmf(L, n1, 1.0 / 3.0) * w1.at(n1, delta[0]);
      if (a == 0.0) continue;
      for (int n2 = std::abs(delta[1]); n2 <= L - n1; n2 += 2) {
        const int n3 = L - n1 - n2;
        if (std::abs(delta[2]) > n3 || ((n3 ^ std::abs(delta[2])) & 1)) continue;
        push({n1, n2, n3, 0}, a * binom_pmf(L - n1, n2, 0.5) * w1.at(n2, delta[1]) * w1.at(n3, delta[2]));
      }
    }
  } else {
    for (int n1 = std::abs(delta[0]); n1 <= L; n1 += 2) {
      const double a = binom_pmf(L, n1, 1.0 / 4.0) * w1.at(n1, delta[0]);
      if (a == 0.0) continue;
      for (int n2 = std::abs(delta[1]); n2 <= L - n1; n2 += 2) {
        const double b = a * binom_pmf(L - n1, n2, 1.0 / 3.0) * w1.at(n2, delta[1]);
        if (b == 0.0) continue;
        for (int n3 = std::abs(delta[2]); n3 <= L - n1 - n2; n3 += 2) {
          const int n4 = L - n1 - n2 - n3;
          if (std::abs(delta[3]) > n4 || ((n4 ^ std::abs(delta[3])) & 1)) continue;
          push({n1, n2, n3, n4},
               b * binom_pmf(L - n1 - n2, n3, 0.5) * w1.at(n3, delta[2]) * w1.at(n4, delta[3]));
        }
      }
    }
  }
  if (cands.empty()) throw std::invalid_argument("bridge endpoint infeasible");
  std::array<int, 4> rem{};
  {
    double u = f.u01(Lane::BridgeAlloc, key, occ) * total;
    size_t pickidx = cands.size() - 1;
    for (size_t i = 0; i < cands.size(); ++i) {
      u -= cands[i].w;
      if (u <= 0.0) {
        pickidx = i;
        break;
      }
    }
    rem = cands[pickidx].n;
  }

  Traj<LatticeVertex> w;
  w.start = x;
  w.steps.reserve(L);
  std::array<int, 4> done{};
  int total_rem = L;
  for (int t = 0; t < L; ++t) {
    const double uc = f.u01(Lane::BridgeStep, key, pack_idx(occ, 2 * t));
    int j = d - 1;
    double acc = 0.0;
    for (int jj = 0; jj < d; ++jj) {
      acc += static_cast<double>(rem[jj]) / total_rem;
      if (uc < acc) {
        j = jj;
        break;
      }
    }
    while (rem[j] == 0) j = (j + 1) % d;
    const int m = rem[j];
    const int need = delta[j] - done[j];
    const double pup = 0.5 * w1.at(m - 1, need - 1) / w1.at(m, need);
    const double us = f.u01(Lane::BridgeStep, key, pack_idx(occ, 2 * t + 1));
    const int sign = us < pup ? +1 : -1;
    w.steps.push_back(static_cast<uint8_t>(2 * j + (sign < 0 ? 1 : 0)));
    done[j] += sign;
    --rem[j];
    --total_rem;
  }
  w.end = y;
  return w;
}

// Next vertex on the tree geodesic from z to y (z != y).
inline TreeSpace::Vertex tree_toward(TreeSpace& s, TreeSpace::Vertex z, TreeSpace::Vertex y) {
  if (s.height(y) >= s.height(z)) return s.parent(z);
  TreeSpace::Vertex b = y;
  while (s.height(b) < s.height(z) - 1) b = s.parent(b);
  if (s.parent(b) == z) return b;
  return s.parent(z);
}

inline Traj<TreeSpace::Vertex> tree_bridge(RegularTree& g, const TreeKernel& kern, const Field& f,
                                           TreeSpace::Vertex x, TreeSpace::Vertex y, int L, uint64_t occ) {
  TreeSpace& s = g.space();
  int64_t dist = s.tree_distance(x, y);
  if (dist > L || ((dist ^ static_cast<int64_t>(L)) & 1))
    throw std::invalid_argument("bridge endpoint infeasible");
  const int d = g.degree();
  const VertexKey key = g.key(x);
  Traj<TreeSpace::Vertex> w;
  w.start = x;
  w.steps.reserve(L);
  TreeSpace::Vertex cur = x;
  for (int t = 0; t < L; ++t) {
    const int m = L - t;
    const double u = f.u01(Lane::BridgeStep, key, pack_idx(occ, t));
    uint8_t kpick;
    if (cur == y) {
      kpick = static_cast<uint8_t>(std::min<int>(d - 1, static_cast<int>(u * d)));
      dist = 1;
    } else {
      const TreeSpace::Vertex fwd = tree_toward(s, cur, y);
      const uint8_t fwd_slot =
          s.height(fwd) > s.height(cur) ? 0 : static_cast<uint8_t>(1 + s.child_index(fwd));
      const double ptoward = (1.0 / d) * kern.eval(m - 1, dist - 1) / kern.eval(m, dist);
      if (u < ptoward) {
        kpick = fwd_slot;
        dist -= 1;
      } else {
        int a = static_cast<int>((u - ptoward) / ((1.0 - ptoward) / (d - 1)));
        if (a >= d - 1) a = d - 2;
        kpick = static_cast<uint8_t>(a < fwd_slot ? a : a + 1);
        dist += 1;
      }
    }
    w.steps.push_back(kpick);
    cur = g.neighbor(cur, kpick);
  }
  if (cur != y) throw std::logic_error("tree bridge missed its endpoint");
  w.end = y;
  return w;
}

// Fallback bridge through a dense kernel field (Grandparent, small horizons).
template <class G>
Traj<typename G::Vertex> dense_bridge(G& g, const DenseKernelField<G>& ker_y, const Field& f,
                                      const typename G::Vertex& x, const typename G::Vertex& y, int L,
                                      uint64_t occ) {
  if (ker_y.at(L, x) <= 0.0) throw std::invalid_argument("bridge endpoint infeasible");
  const int d = g.degree();
  const VertexKey key = g.key(x);
  Traj<typename G::Vertex> w;
  w.start = x;
  w.steps.reserve(L);
  typename G::Vertex cur = x;
  for (int t = 0; t < L; ++t) {
    const int m = L - t;
    const double denom = ker_y.at(m, cur) * d;
    double u = f.u01(Lane::BridgeStep, key, pack_idx(occ, t)) * denom;
    uint8_t kpick = static_cast<uint8_t>(d - 1);
    for (int k = 0; k < d; ++k) {
      u -= ker_y.at(m - 1, g.neighbor(cur, k));
      if (u <= 0.0) {
        kpick = static_cast<uint8_t>(k);
        break;
      }
    }
    w.steps.push_back(kpick);
    cur = g.neighbor(cur, kpick);
  }
  if (!(cur == y)) throw std::logic_error("dense bridge missed its endpoint");
  w.end = y;
  return w;
}

}  // namespace rif

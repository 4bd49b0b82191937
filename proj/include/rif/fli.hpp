#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rif/graph.hpp"
#include "rif/pointproc.hpp"
#include "rif/potential.hpp"
#include "rif/prng.hpp"
#include "rif/walk.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Finite-length interlacements P_{v,T}: Poisson(v) walk starts per window
// vertex, each running T-1 steps. The local image on K has the exact
// P_{v,T}-law whenever the window reaches radius(K) + T - 1. Extending the
// window never perturbs existing trajectories (all draws are vertex-keyed).
// ---------------------------------------------------------------------------

template <class G, class W>
TrajMeasure<typename G::Vertex> sample_fli(G& g, const W& win, const Field& f, double v, int T) {
  if (v < 0.0 || T < 1) throw std::invalid_argument("sample_fli: need v >= 0, T >= 1");
  TrajMeasure<typename G::Vertex> out;
  if (v == 0.0) return out;
  for (size_t i = 0; i < win.size(); ++i) {
    const auto x = win.vertex(i);
    const uint32_t n = f.poisson(Lane::StartCount, g.key(x), 0, v);
    for (uint32_t j = 0; j < n; ++j) out.push_back(sample_srw(g, f, x, T - 1, Lane::WalkStep, j));
  }
  return out;
}

template <class G, class W>
LabeledMeasure<typename G::Vertex> sample_fli_labeled(G& g, const W& win, const Field& f, int T) {
  LabeledMeasure<typename G::Vertex> out;
  const double v = 1.0 / T;
  for (size_t i = 0; i < win.size(); ++i) {
    const auto x = win.vertex(i);
    const VertexKey key = g.key(x);
    const uint32_t n = f.poisson(Lane::StartCount, key, 0, v);
    for (uint32_t j = 0; j < n; ++j)
      out.push_back({sample_srw(g, f, x, T - 1, Lane::WalkStep, j), f.u01(Lane::Label, key, j)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local window of the infinite interlacement: for each x in K, Poisson(u)
// doubly infinite walks centered at x; a walk is kept when its backward part
// never revisits K within s_bwd steps (the H_K = 0 condition, truncated). The
// forward part runs until it has spent s_fwd consecutive steps outside the
// radius r_stop envelope of K; a probe of the same length then watches for
// late returns, resuming the walk if one occurs (counted as a diagnostic).
// ---------------------------------------------------------------------------

struct RiLocalParams {
  double u = 1.0;
  int s_bwd = 2000;
  int r_stop = 100;
  int s_fwd = 400;
  int hard_cap = 200000;  // absolute step budget per forward walk
};

inline RiLocalParams ri_defaults_lattice() { return RiLocalParams{1.0, 2000, 100, 400, 200000}; }
inline RiLocalParams ri_defaults_tree() { return RiLocalParams{1.0, 200, 40, 60, 20000}; }

template <class V>
struct DoubleWalk {
  V center{};
  Traj<V> bwd;  // backward part, forward-reparameterized from the center
  Traj<V> fwd;
  double label = 0.0;  // uniform on [0, u]
  uint64_t occ = 0;
};

template <class V>
struct RiLocalSample {
  std::vector<DoubleWalk<V>> kept;
  LocalImage<V> image;  // Lambda_K, labels rescaled to [0,1]
  uint32_t total_started = 0;
  uint32_t late_returns = 0;  // forward stop-rule violations caught by the probe
  int64_t visits_K = 0;       // total visits to K over kept forward parts
};

template <class G>
int64_t dist_to_set(G& g, const typename G::Vertex& v, const KSet<typename G::Vertex>& K) {
  int64_t best = -1;
  for (const auto& k : K.verts) {
    const int64_t d = g.distance(v, k);
    if (best < 0 || d < best) best = d;
  }
  return best;
}

template <class G>
RiLocalSample<typename G::Vertex> sample_ri_local(G& g, const KSet<typename G::Vertex>& K, const Field& f,
                                                  const RiLocalParams& par) {
  using V = typename G::Vertex;
  RiLocalSample<V> out;
  for (const auto& x : K.verts) {
    const VertexKey key = g.key(x);
    const uint32_t n = f.poisson(Lane::StartCount, key, 0, par.u);
    out.total_started += n;
    for (uint32_t j = 0; j < n; ++j) {
      // backward leg: fresh SRW (time reversal), rejected on any K-revisit
      Traj<V> bwd;
      bwd.start = x;
      bwd.steps.reserve(par.s_bwd);
      V cur = x;
      bool revisit = false;
      for (int t = 0; t < par.s_bwd; ++t) {
        const uint8_t k = static_cast<uint8_t>(f.pick(Lane::BwdStep, key, pack_idx(j, t), g.degree()));
        cur = g.neighbor(cur, k);
        bwd.steps.push_back(k);
        if (K.contains(cur)) {
          revisit = true;
          break;
        }
      }
      if (revisit) continue;
      bwd.end = cur;

      // forward leg with envelope stop rule + probe
      Traj<V> fwd;
      fwd.start = x;
      cur = x;
      int64_t visits = 1;  // time 0 sits in K
      int outside_run = 0;
      bool probing = false;
      int probe_left = 0;
      for (int t = 0; t < par.hard_cap; ++t) {
        const uint8_t k = static_cast<uint8_t>(f.pick(Lane::FwdStep, key, pack_idx(j, t), g.degree()));
        cur = g.neighbor(cur, k);
        fwd.steps.push_back(k);
        if (K.contains(cur)) {
          ++visits;
          outside_run = 0;
          if (probing) {
            ++out.late_returns;
            probing = false;
          }
        } else if (dist_to_set(g, cur, K) > par.r_stop) {
          ++outside_run;
        } else {
          outside_run = 0;
          if (probing) probing = false;  // wandered back near K: keep walking
        }
        if (!probing && outside_run >= par.s_fwd) {
          probing = true;
          probe_left = par.s_fwd;
        } else if (probing && --probe_left <= 0) {
          break;
        }
      }
      fwd.end = cur;

      DoubleWalk<V> dw;
      dw.center = x;
      dw.bwd = std::move(bwd);
      dw.fwd = std::move(fwd);
      dw.label = par.u * f.u01(Lane::Label, key, j);
      dw.occ = j;
      out.visits_K += visits;
      // Lambda_K of the double walk equals Lambda_K of the forward part: the
      // backward part misses K and time 0 sits in it.
      localize_into(g, dw.fwd, dw.label / par.u, K, out.image);
      out.kept.push_back(std::move(dw));
    }
  }
  return out;
}

// Monte-Carlo estimate of the truncation gap e_K^s(x) - e_K^{2s}(x): the
// fraction of backward legs that avoid K for s steps but fail within 2s.
template <class G>
double ri_bwd_gap_estimate(G& g, const KSet<typename G::Vertex>& K, const Field& f, int s, int reps) {
  int ok_s = 0, ok_2s = 0;
  for (int i = 0; i < reps; ++i) {
    const auto& x = K.verts[static_cast<size_t>(i) % K.verts.size()];
    auto cur = x;
    bool hit_s = false, hit_2s = false;
    for (int t = 0; t < 2 * s; ++t) {
      cur = g.neighbor(cur, static_cast<uint8_t>(f.pick(Lane::Scratch, g.key(x), pack_idx(i, t), g.degree())));
      if (K.contains(cur)) {
        if (t < s) hit_s = true;
        hit_2s = true;
        break;
      }
    }
    ok_s += hit_s ? 0 : 1;
    ok_2s += hit_2s ? 0 : 1;
  }
  return static_cast<double>(ok_s - ok_2s) / reps;
}

// ---------------------------------------------------------------------------
// Exact lazy sampler of Lambda_{o}(Q_T) on the regular tree via the first-hit
// decomposition: trajectories of W_T hitting o decompose over the first-hit
// time s with intensity (1/T) e^s(o); the pre-hit leg reversed is a walk from
// o conditioned to avoid o (h-transform on the distance chain). No windows,
// so arbitrarily large T stays exact.
// ---------------------------------------------------------------------------

class TreeHitLaw {
 public:
  TreeHitLaw(int deg, int T) : d_(deg), T_(T), avoid_(T, std::vector<double>(T + 2, 1.0)) {
    // avoid_[m][k] = P(from distance k, m steps never hit the root)
    for (int m = 1; m < T; ++m)
      for (int k = 1; k <= T_ + 1; ++k) {
        const double down = k > 1 ? avoid_[m - 1][k - 1] : 0.0;
        const double up = k + 1 <= T_ + 1 ? avoid_[m - 1][k + 1] : 1.0;
        avoid_[m][k] = (down + (d_ - 1) * up) / d_;
      }
    cum_.resize(T_);
    double tot = 0.0;
    for (int s = 0; s < T_; ++s) {
      // e^s(o) = P_o(no return within s steps) = avoid(1, s-1) after one step
      const double es = s == 0 ? 1.0 : avoid_[s - 1][1];
      tot += es / T_;
      cum_[s] = tot;
    }
  }

  double total_rate() const { return cum_.back(); }
  double avoid(int k, int m) const {
    if (k <= 0) return 0.0;
    if (m <= 0) return 1.0;
    if (k > T_ + 1) return 1.0;
    return avoid_[m][k];
  }
  int pick_s(double u) const {
    const double target = u * total_rate();
    for (int s = 0; s < T_; ++s)
      if (cum_[s] >= target) return s;
    return T_ - 1;
  }

 private:
  int d_, T_;
  std::vector<std::vector<double>> avoid_;
  std::vector<double> cum_;
};

// One replica: the local image at K={o} of a Q_T sample, exact in law.
inline LocalImage<TreeSpace::Vertex> tree_qt_local_image(RegularTree& g, const TreeHitLaw& law,
                                                         const Field& f, int T) {
  TreeSpace& s = g.space();
  const auto o = g.origin();
  const VertexKey key = g.key(o);
  const int d = g.degree();
  LocalImage<TreeSpace::Vertex> img;
  const uint32_t n = f.poisson(Lane::StartCount, key, 1, law.total_rate());
  for (uint32_t j = 0; j < n; ++j) {
    const int hit_s = law.pick_s(f.u01(Lane::Scratch, key, pack_idx(j, 0)));
    // reversed pre-hit leg: from o, hit_s steps conditioned to avoid o
    std::vector<TreeSpace::Vertex> pre;  // pre[t] = w(hit_s - 1 - t)
    TreeSpace::Vertex cur = o;
    int64_t dist = 0;
    for (int t = 0; t < hit_s; ++t) {
      const int m = hit_s - t;  // steps left including this one
      const double u = f.u01(Lane::BwdStep, key, pack_idx(j, t));
      bool toward;
      if (dist == 0) {
        toward = false;  // leaving the root
      } else {
        const double ptoward = (1.0 / d) * law.avoid(static_cast<int>(dist) - 1, m - 1) /
                               law.avoid(static_cast<int>(dist), m);
        toward = u < ptoward;
      }
      if (toward) {
        cur = tree_toward(s, cur, o);
        --dist;
      } else {
        // uniform among the non-toward neighbours
        const int navail = dist == 0 ? d : d - 1;
        int a = static_cast<int>(f.u01(Lane::FieldGap, key, pack_idx(j, t)) * navail);
        if (a >= navail) a = navail - 1;
        if (dist == 0) {
          cur = g.neighbor(cur, a);
        } else {
          const auto fwdv = tree_toward(s, cur, o);
          const uint8_t slot = s.height(fwdv) > s.height(cur)
                                   ? 0
                                   : static_cast<uint8_t>(1 + s.child_index(fwdv));
          const uint8_t kpick = static_cast<uint8_t>(a < slot ? a : a + 1);
          cur = g.neighbor(cur, kpick);
        }
        ++dist;
      }
      pre.push_back(cur);
    }
    // assemble w(0..T-1): pre reversed, then o, then a free walk
    std::vector<TreeSpace::Vertex> path(pre.rbegin(), pre.rend());
    path.push_back(o);
    cur = o;
    for (int t = hit_s + 1; t < T; ++t) {
      cur = g.neighbor(cur, static_cast<uint8_t>(f.pick(Lane::FwdStep, key, pack_idx(j, t), d)));
      path.push_back(cur);
    }
    // local image at {o}: slice between first and last o-visit
    size_t first = hit_s, last = hit_s;
    for (size_t t = hit_s; t < path.size(); ++t)
      if (path[t] == o) last = t;
    Traj<TreeSpace::Vertex> sub;
    sub.start = path[first];
    sub.end = path[last];
    sub.steps.reserve(last - first);
    for (size_t t = first; t < last; ++t) {
      // recover the neighbor index from path[t] to path[t+1]
      uint8_t kk = 0;
      for (int k = 0; k < d; ++k)
        if (g.neighbor(path[t], k) == path[t + 1]) {
          kk = static_cast<uint8_t>(k);
          break;
        }
      sub.steps.push_back(kk);
    }
    auto keystr = shape_key(g, sub);
    auto& e = img.shapes[keystr];
    if (e.labels.empty()) e.rep = sub;
    e.labels.push_back(f.u01(Lane::Label, key, pack_idx(j, 1)));
  }
  return img;
}

// ---------------------------------------------------------------------------
// Interlacement Aldous-Broder: keep at every covered vertex the first entry
// edge of the smallest-label trajectory. Returns per-vertex parent pointers.
// ---------------------------------------------------------------------------

template <class V>
struct WusfResult {
  std::vector<std::pair<V, V>> edges;  // (child, parent) for every covered window vertex
  std::vector<V> uncovered;            // inner-region vertices never visited
  size_t covered = 0;
  bool acyclic = true;
};

// Keep at every covered vertex the entry edge of the minimal-label trajectory
// that first visits it. Along a kept edge the pair (label, first-visit time)
// strictly decreases lexicographically, so the output is always cycle-free.
template <class G, class W>
WusfResult<typename G::Vertex> wusf_from_ri(G& g, const W& win, int inner_radius, const Field& f,
                                            const RiLocalParams& par) {
  using V = typename G::Vertex;
  struct Visit {
    double label = std::numeric_limits<double>::infinity();
    V prev{};
  };
  std::vector<Visit> best(win.size());

  for (size_t i = 0; i < win.size(); ++i) {
    const V x = win.vertex(i);
    const VertexKey key = g.key(x);
    const uint32_t n = f.poisson(Lane::StartCount, key, 0, par.u);
    for (uint32_t j = 0; j < n; ++j) {
      V cur = x;
      V bwd1{};
      bool revisit = false;
      for (int t = 0; t < par.s_bwd; ++t) {
        cur = g.neighbor(cur, static_cast<uint8_t>(f.pick(Lane::BwdStep, key, pack_idx(j, t), g.degree())));
        if (t == 0) bwd1 = cur;
        if (win.contains(cur)) {
          revisit = true;
          break;
        }
      }
      if (revisit) continue;
      const double label = par.u * f.u01(Lane::Label, key, j);

      // forward leg: collect first visits into the window
      std::vector<std::pair<size_t, V>> first_visits;  // (window index, predecessor)
      std::vector<uint8_t> seen(win.size(), 0);
      auto note = [&](const V& v, const V& prev) {
        const size_t idx = win.index(v);
        if (!seen[idx]) {
          seen[idx] = 1;
          first_visits.emplace_back(idx, prev);
        }
      };
      note(x, bwd1);
      cur = x;
      int outside_run = 0;
      for (int t = 0; t < par.hard_cap; ++t) {
        const V prev = cur;
        cur = g.neighbor(cur, static_cast<uint8_t>(f.pick(Lane::FwdStep, key, pack_idx(j, t), g.degree())));
        if (win.contains(cur)) {
          note(cur, prev);
          outside_run = 0;
        } else if (++outside_run >= par.s_fwd + par.r_stop) {
          break;
        }
      }
      // first_visits is in visit order; labels across walks are a.s. distinct
      for (const auto& [idx, prev] : first_visits) {
        if (label < best[idx].label) best[idx] = Visit{label, prev};
      }
    }
  }

  WusfResult<V> out;
  std::vector<int64_t> parent_idx(win.size(), -2);  // -2 uncovered, -1 parent outside window
  for (size_t i = 0; i < win.size(); ++i) {
    if (std::isinf(best[i].label)) {
      if (win.inner(win.vertex(i), inner_radius)) out.uncovered.push_back(win.vertex(i));
      continue;
    }
    ++out.covered;
    out.edges.emplace_back(win.vertex(i), best[i].prev);
    parent_idx[i] = win.contains(best[i].prev) ? static_cast<int64_t>(win.index(best[i].prev)) : -1;
  }
  // cycle detection over the covered set
  std::vector<uint8_t> color(win.size(), 0);  // 0 unseen, 1 in progress, 2 done
  for (size_t i = 0; i < win.size(); ++i) {
    if (parent_idx[i] == -2 || color[i]) continue;
    std::vector<size_t> chain;
    size_t v = i;
    while (true) {
      if (color[v] == 1) {
        out.acyclic = false;
        break;
      }
      if (color[v] == 2) break;
      color[v] = 1;
      chain.push_back(v);
      const int64_t p = parent_idx[v];
      if (p < 0) break;  // parent uncovered or outside the window
      if (parent_idx[p] == -2) break;
      v = static_cast<size_t>(p);
    }
    for (size_t c : chain) color[c] = 2;
  }
  return out;
}

}  // namespace rif

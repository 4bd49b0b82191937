#pragma once

#include <cstdint>
#include <memory>
#include <type_traits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rif/fli.hpp"
#include "rif/graph.hpp"
#include "rif/kernel.hpp"
#include "rif/pointproc.hpp"
#include "rif/prng.hpp"
#include "rif/slt.hpp"
#include "rif/walk.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Length-doubling coupling: split P_{v,T} by fair coins, match the terminal
// points of one half to the starting points of the other via soft local time,
// stitch matched pairs with L-step bridges (L = ceil(T^{4/7} v^{-2/7})),
// rewire the unmatched starts with fresh walks, and keep the first 2T steps.
// ---------------------------------------------------------------------------

inline int doubling_bridge_len(int T, double v) {
  return static_cast<int>(std::ceil(std::pow(T, 4.0 / 7.0) * std::pow(v, -2.0 / 7.0)));
}

template <class V>
struct DoublingTrace {
  TrajMeasure<V> x1, x2, bridges, tails, xpp, output;
  std::vector<SltPair<V>> pairs;   // aligned with x1
  std::vector<uint8_t> far;        // x1 members skipped by the match-radius cap
  std::vector<uint8_t> x2_used;    // x2 members consumed as continuations
  uint32_t rounds = 0;
  uint64_t guard_violations = 0;
  uint32_t far_count = 0;
  uint32_t far_tail_probe_hits = 0;  // far fresh tails touching the probe set
  double g_origin = 0.0;
};

inline bool vertex_less(const LatticeVertex& a, const LatticeVertex& b) { return a.c < b.c; }

template <class G>
bool vertex_less_tree(G& g, TreeSpace::Vertex a, TreeSpace::Vertex b) {
  if (g.height(a) != g.height(b)) return g.height(a) < g.height(b);
  const auto ka = g.key(a), kb = g.key(b);
  return ka.a != kb.a ? ka.a < kb.a : ka.b < kb.b;
}

// Canonical same-anchor occurrence indices: members are grouped by an anchor
// vertex and ordered translation-covariantly (anchor, then step bytes).
template <class V, class Less>
std::vector<uint32_t> canonical_occs(const TrajMeasure<V>& m, const std::vector<V>& anchors, Less less) {
  std::vector<uint32_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
    if (less(anchors[a], anchors[b])) return true;
    if (less(anchors[b], anchors[a])) return false;
    if (m[a].steps != m[b].steps) return m[a].steps < m[b].steps;
    return a < b;
  });
  std::vector<uint32_t> occ(m.size(), 0);
  for (size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && !less(anchors[idx[i - 1]], anchors[idx[i]]) && !less(anchors[idx[i]], anchors[idx[i - 1]]))
      occ[idx[i]] = occ[idx[i - 1]] + 1;
    else
      occ[idx[i]] = 0;
  }
  return occ;
}

struct CoupleConfig {
  int match_radius = -1;   // R1 points beyond this distance from the window
                           // center take the fresh-continuation route (-1: off)
  double eta_margin = 25.0;
  bool keep_trace = false;
  uint32_t round_cap = 1 << 20;
};

// ------------------------------ lattice -----------------------------------

class LatticeCoupleOps {
 public:
  using G = Lattice;
  using V = LatticeVertex;

  LatticeCoupleOps(Lattice& g, LatticeWindow starts, const Field& f, CoupleConfig cfg = {})
      : g_(g), starts_(starts), f_(f), cfg_(cfg) {}

  Lattice& graph() { return g_; }
  const LatticeWindow& starts() const { return starts_; }
  const Field& field() const { return f_; }

  // Psi_{v,T}: input ~ P_{v,T} (starts in the window), output ~ P_{v/2,2T}.
  TrajMeasure<V> double_unlabeled(const TrajMeasure<V>& input, double v, int T, uint32_t salt,
                                  const KSet<V>* probe, DoublingTrace<V>* trace) {
    if (!(v >= std::pow(T, -1.5) && v <= static_cast<double>(T) * T))
      throw std::invalid_argument("double_unlabeled: v outside [T^-3/2, T^2]");
    const int L = doubling_bridge_len(T, v);
    const int rt = slt_support_radius(L, 3);
    LatticeKernel kern(3, std::max(2 * L, 2));
    const LatticeBallTable tab = make_ball_table(kern, L, rt);
    return run(input, v, T, L, rt, kern, tab, salt, probe, trace);
  }

  // Variant reusing prebuilt kernels (the cascade builds them once per level).
  TrajMeasure<V> run(const TrajMeasure<V>& input, double v, int T, int L, int rt,
                     const LatticeKernel& kern, const LatticeBallTable& tab, uint32_t salt,
                     const KSet<V>* probe, DoublingTrace<V>* trace) {
    const double alpha = v / 2.0;
    DoublingTrace<V> local;
    DoublingTrace<V>& tr = trace ? *trace : local;

    // fair-coin split keyed by (start vertex, canonical occurrence)
    std::vector<V> starts_of(input.size());
    for (size_t i = 0; i < input.size(); ++i) starts_of[i] = input[i].start;
    const auto occs = canonical_occs(input, starts_of, vertex_less);
    for (size_t i = 0; i < input.size(); ++i) {
      const double coin = f_.u01(Lane::Coin, g_.key(input[i].start), pack_idx3(salt, occs[i], 0));
      if (coin < 0.5)
        tr.x1.push_back(input[i]);
      else
        tr.x2.push_back(input[i]);
    }

    // R1 = terminal points of X1, R2 = initial points of X2
    std::vector<V> r1v(tr.x1.size()), r2v(tr.x2.size());
    for (size_t i = 0; i < tr.x1.size(); ++i) r1v[i] = tr.x1[i].end;
    for (size_t i = 0; i < tr.x2.size(); ++i) r2v[i] = tr.x2[i].start;
    const auto r1occ = canonical_occs(tr.x1, r1v, vertex_less);
    const auto r2occ = canonical_occs(tr.x2, r2v, vertex_less);

    // match-radius cap: far R1 points take the fresh route (law-exact; the
    // probe-hit counter reports when this could have mattered for Lambda_K)
    tr.far.assign(tr.x1.size(), 0);
    std::vector<SltPoint<V>> r1pts;
    std::vector<uint32_t> r1idx;
    for (size_t i = 0; i < tr.x1.size(); ++i) {
      if (cfg_.match_radius >= 0 && !starts_.inner(r1v[i], cfg_.match_radius)) {
        tr.far[i] = 1;
        ++tr.far_count;
      } else {
        r1pts.push_back({r1v[i], r1occ[i]});
        r1idx.push_back(static_cast<uint32_t>(i));
      }
    }
    std::vector<SltPoint<V>> r2pts(tr.x2.size());
    for (size_t i = 0; i < tr.x2.size(); ++i) r2pts[i] = {r2v[i], r2occ[i]};

    // field window covers every matched point's support ball
    const int field_radius =
        (cfg_.match_radius >= 0 ? cfg_.match_radius : starts_.radius() + (T - 1)) + rt;
    LatticeWindow field_win(g_, starts_.center(), field_radius);
    SltParams sp;
    sp.alpha = alpha;
    sp.L = L;
    sp.salt = salt;
    sp.eta_margin = cfg_.eta_margin;
    sp.round_cap = cfg_.round_cap;
    SltLattice slt(g_, field_win, tab, nullptr, f_, sp);
    // R2 points outside the field window cannot be consumed; they stay
    // unmatched (their trajectories are dropped like any unmatched R2).
    std::vector<SltPoint<V>> r2in;
    std::vector<size_t> r2map;
    std::unordered_map<V, std::vector<size_t>> r2_by_vertex;
    for (size_t i = 0; i < r2pts.size(); ++i) {
      auto& bucket = r2_by_vertex[r2v[i]];
      if (bucket.size() <= r2pts[i].occ) bucket.resize(r2pts[i].occ + 1, SIZE_MAX);
      bucket[r2pts[i].occ] = i;
      if (field_win.contains(r2pts[i].x)) r2in.push_back(r2pts[i]);
    }
    slt.build_field(r2in);
    std::vector<V> probes{starts_.center()};
    auto sres = slt.match(r1pts, probes);
    tr.rounds = sres.rounds;
    tr.guard_violations = sres.guard_violations;
    tr.g_origin = sres.g_probe.empty() ? 0.0 : sres.g_probe[0];

    // assemble pairs aligned with X1
    tr.pairs.assign(tr.x1.size(), {});
    for (size_t k = 0; k < r1idx.size(); ++k) tr.pairs[r1idx[k]] = sres.pairs[k];

    // continuations: matched-real keeps the actual X2 trajectory; phantom and
    // far points get fresh walks
    tr.x2_used.assign(tr.x2.size(), 0);
    tr.bridges.resize(tr.x1.size());
    tr.tails.resize(tr.x1.size());
    std::unordered_map<V, uint32_t> phantom_ctr;
    TrajMeasure<V> out;
    out.reserve(tr.x1.size());
    for (size_t i = 0; i < tr.x1.size(); ++i) {
      const V x = r1v[i];
      Traj<V> tail;
      Traj<V> bridge;
      if (tr.far[i]) {
        // fresh SRW of L + (T-1) steps; the first L steps stand in for the bridge
        const uint64_t occ = pack_idx3(salt, r1occ[i], 5);
        auto walk = sample_srw(g_, f_, x, L + T - 1, Lane::ContStep, occ);
        bridge = shear_initial(g_, walk, L + 1);
        tail = shear_terminal(g_, walk, T);
        if (probe) {
          auto vs = traj_vertices(g_, walk);
          for (const auto& vv : vs)
            if (probe->contains(vv)) {
              ++tr.far_tail_probe_hits;
              break;
            }
        }
      } else {
        const auto& pr = tr.pairs[i];
        bridge = lattice_bridge(g_, kern, f_, x, pr.y, L, pack_idx3(salt, r1occ[i], 6));
        if (pr.real) {
          auto& bucket = r2_by_vertex[pr.y];
          const size_t j = bucket[pr.r2_occ];
          tail = tr.x2[j];
          tr.x2_used[j] = 1;
        } else {
          uint32_t& c = phantom_ctr[pr.y];
          tail = sample_srw(g_, f_, pr.y, T - 1, Lane::ContStep, pack_idx3(salt, c, 7));
          ++c;
        }
      }
      // stitch w1 (T) + bridge (L+1) + tail (T) sharing endpoints
      Traj<V> w2t;
      w2t.start = tr.x1[i].start;
      w2t.steps.reserve(2 * T + L - 2);
      w2t.steps.insert(w2t.steps.end(), tr.x1[i].steps.begin(), tr.x1[i].steps.end());
      w2t.steps.insert(w2t.steps.end(), bridge.steps.begin(), bridge.steps.end());
      w2t.steps.insert(w2t.steps.end(), tail.steps.begin(), tail.steps.end());
      w2t.end = tail.end;
      tr.bridges[i] = std::move(bridge);
      tr.tails[i] = tail;
      if (cfg_.keep_trace) tr.xpp.push_back(w2t);
      out.push_back(shear_initial(g_, w2t, 2 * T));
    }
    if (cfg_.keep_trace) tr.output = out;
    return out;
  }

 private:
  Lattice& g_;
  LatticeWindow starts_;
  const Field& f_;
  CoupleConfig cfg_;
};

// -------------------------------- tree ------------------------------------

class TreeCoupleOps {
 public:
  using G = RegularTree;
  using V = TreeSpace::Vertex;

  TreeCoupleOps(RegularTree& g, BallWindow<RegularTree> starts, const Field& f, CoupleConfig cfg = {})
      : g_(g), starts_(std::move(starts)), f_(f), cfg_(cfg) {}

  RegularTree& graph() { return g_; }
  const BallWindow<RegularTree>& starts() const { return starts_; }
  const Field& field() const { return f_; }

  TrajMeasure<V> double_unlabeled(const TrajMeasure<V>& input, double v, int T, uint32_t salt,
                                  const KSet<V>* probe, DoublingTrace<V>* trace) {
    if (!(v >= std::pow(T, -1.5) && v <= static_cast<double>(T) * T))
      throw std::invalid_argument("double_unlabeled: v outside [T^-3/2, T^2]");
    const int L = doubling_bridge_len(T, v);
    TreeKernel kern(g_.degree(), std::max(2 * L, 2));
    return run(input, v, T, L, kern, salt, probe, trace);
  }

  TrajMeasure<V> run(const TrajMeasure<V>& input, double v, int T, int L, const TreeKernel& kern,
                     uint32_t salt, const KSet<V>* probe, DoublingTrace<V>* trace) {
    (void)probe;
    const double alpha = v / 2.0;
    DoublingTrace<V> local;
    DoublingTrace<V>& tr = trace ? *trace : local;
    auto less = [&](V a, V b) { return vertex_less_tree(g_, a, b); };

    std::vector<V> starts_of(input.size());
    for (size_t i = 0; i < input.size(); ++i) starts_of[i] = input[i].start;
    const auto occs = canonical_occs(input, starts_of, less);
    for (size_t i = 0; i < input.size(); ++i) {
      const double coin = f_.u01(Lane::Coin, g_.key(input[i].start), pack_idx3(salt, occs[i], 0));
      if (coin < 0.5)
        tr.x1.push_back(input[i]);
      else
        tr.x2.push_back(input[i]);
    }
    std::vector<V> r1v(tr.x1.size()), r2v(tr.x2.size());
    for (size_t i = 0; i < tr.x1.size(); ++i) r1v[i] = tr.x1[i].end;
    for (size_t i = 0; i < tr.x2.size(); ++i) r2v[i] = tr.x2[i].start;
    const auto r1occ = canonical_occs(tr.x1, r1v, less);
    const auto r2occ = canonical_occs(tr.x2, r2v, less);

    // On the tree everything is windowed: R1 points outside the field window
    // take the fresh route (window-universe semantics).
    tr.far.assign(tr.x1.size(), 0);
    std::vector<SltPoint<V>> r1pts;
    std::vector<uint32_t> r1idx;
    for (size_t i = 0; i < tr.x1.size(); ++i) {
      if (!starts_.contains(r1v[i])) {
        tr.far[i] = 1;
        ++tr.far_count;
      } else {
        r1pts.push_back({r1v[i], r1occ[i]});
        r1idx.push_back(static_cast<uint32_t>(i));
      }
    }
    std::vector<SltPoint<V>> r2in;
    std::unordered_map<V, std::vector<size_t>> r2_by_vertex;
    for (size_t i = 0; i < tr.x2.size(); ++i) {
      auto& bucket = r2_by_vertex[r2v[i]];
      if (bucket.size() <= r2occ[i]) bucket.resize(r2occ[i] + 1, SIZE_MAX);
      bucket[r2occ[i]] = i;
      if (starts_.contains(r2v[i])) r2in.push_back({r2v[i], r2occ[i]});
    }

    SltParams sp;
    sp.alpha = alpha;
    sp.L = L;
    sp.salt = salt;
    sp.eta_margin = cfg_.eta_margin;
    sp.round_cap = cfg_.round_cap;
    SltTree<RegularTree> slt(g_, starts_, kern, f_, sp);
    slt.build_field(r2in);
    std::vector<V> probes{starts_.center()};
    auto sres = slt.match(r1pts, probes);
    tr.rounds = sres.rounds;
    tr.guard_violations = sres.guard_violations;
    tr.g_origin = sres.g_probe.empty() ? 0.0 : sres.g_probe[0];
    tr.pairs.assign(tr.x1.size(), {});
    for (size_t k = 0; k < r1idx.size(); ++k) tr.pairs[r1idx[k]] = sres.pairs[k];

    tr.x2_used.assign(tr.x2.size(), 0);
    tr.bridges.resize(tr.x1.size());
    tr.tails.resize(tr.x1.size());
    std::unordered_map<V, uint32_t> phantom_ctr;
    TrajMeasure<V> out;
    out.reserve(tr.x1.size());
    for (size_t i = 0; i < tr.x1.size(); ++i) {
      const V x = r1v[i];
      Traj<V> tail, bridge;
      if (tr.far[i]) {
        const uint64_t occ = pack_idx3(salt, r1occ[i], 5);
        auto walk = sample_srw(g_, f_, x, L + T - 1, Lane::ContStep, occ);
        bridge = shear_initial(g_, walk, L + 1);
        tail = shear_terminal(g_, walk, T);
      } else {
        const auto& pr = tr.pairs[i];
        bridge = tree_bridge(g_, kern, f_, x, pr.y, L, pack_idx3(salt, r1occ[i], 6));
        if (pr.real) {
          auto& bucket = r2_by_vertex[pr.y];
          const size_t j = bucket[pr.r2_occ];
          tail = tr.x2[j];
          tr.x2_used[j] = 1;
        } else {
          uint32_t& c = phantom_ctr[pr.y];
          tail = sample_srw(g_, f_, pr.y, T - 1, Lane::ContStep, pack_idx3(salt, c, 7));
          ++c;
        }
      }
      Traj<V> w2t;
      w2t.start = tr.x1[i].start;
      w2t.steps.reserve(2 * T + L - 2);
      w2t.steps.insert(w2t.steps.end(), tr.x1[i].steps.begin(), tr.x1[i].steps.end());
      w2t.steps.insert(w2t.steps.end(), bridge.steps.begin(), bridge.steps.end());
      w2t.steps.insert(w2t.steps.end(), tail.steps.begin(), tail.steps.end());
      w2t.end = tail.end;
      tr.bridges[i] = std::move(bridge);
      tr.tails[i] = tail;
      if (cfg_.keep_trace) tr.xpp.push_back(w2t);
      out.push_back(shear_initial(g_, w2t, 2 * T));
    }
    if (cfg_.keep_trace) tr.output = out;
    return out;
  }

 private:
  RegularTree& g_;
  BallWindow<RegularTree> starts_;
  const Field& f_;
  CoupleConfig cfg_;
};

// ---------------------------------------------------------------------------
// Bad events of the doubling (Lemma-style probes on a retained trace).
// ---------------------------------------------------------------------------

template <class V>
struct BadEvents {
  bool additivity_broken = false;   // (i)  Lambda(X) != Lambda(X1) + Lambda(X2)
  bool rewiring_visible = false;    // (ii) Lambda(X2) != Lambda(X2hat)
  bool bridge_hits = false;         // (iii) some bridge hits K
  bool stitching_visible = false;   // (iv) images don't add up though bridges miss K
  bool trim_visible = false;        // (v)  trimming the last L-1 steps changed the image
  bool mismatch = false;            // Lambda_K(input) != Lambda_K(output)
};

template <class G>
LocalImage<typename G::Vertex> image_sum(const LocalImage<typename G::Vertex>& a,
                                         const LocalImage<typename G::Vertex>& b) {
  LocalImage<typename G::Vertex> out = a;
  for (const auto& [k, e] : b.shapes) {
    auto& me = out.shapes[k];
    if (me.labels.empty()) me.rep = e.rep;
    me.labels.insert(me.labels.end(), e.labels.begin(), e.labels.end());
  }
  return out;
}

template <class G>
BadEvents<typename G::Vertex> bad_event_probe(G& g, const TrajMeasure<typename G::Vertex>& input,
                                              const DoublingTrace<typename G::Vertex>& tr,
                                              const KSet<typename G::Vertex>& K, int T) {
  using V = typename G::Vertex;
  BadEvents<V> ev;
  const auto li_in = localize(g, input, K);
  const auto li_x1 = localize(g, tr.x1, K);
  const auto li_x2 = localize(g, tr.x2, K);
  ev.additivity_broken = !li_in.same_shapes(image_sum<G>(li_x1, li_x2));

  // X2hat = matched-real actual trajectories + phantom/far fresh tails
  TrajMeasure<V> x2hat;
  for (size_t i = 0; i < tr.tails.size(); ++i) x2hat.push_back(tr.tails[i]);
  const auto li_x2h = localize(g, x2hat, K);
  ev.rewiring_visible = !li_x2.same_shapes(li_x2h);

  for (const auto& b : tr.bridges)
    if (localize_traj(g, b, K)) {
      ev.bridge_hits = true;
      break;
    }

  // X'' = full concatenations
  TrajMeasure<V> xpp;
  for (size_t i = 0; i < tr.x1.size(); ++i) {
    Traj<V> w;
    w.start = tr.x1[i].start;
    w.steps.insert(w.steps.end(), tr.x1[i].steps.begin(), tr.x1[i].steps.end());
    w.steps.insert(w.steps.end(), tr.bridges[i].steps.begin(), tr.bridges[i].steps.end());
    w.steps.insert(w.steps.end(), tr.tails[i].steps.begin(), tr.tails[i].steps.end());
    w.end = tr.tails[i].end;
    xpp.push_back(std::move(w));
  }
  const auto li_xpp = localize(g, xpp, K);
  if (!ev.bridge_hits)
    ev.stitching_visible = !li_xpp.same_shapes(image_sum<G>(li_x1, li_x2h));

  TrajMeasure<V> out2t;
  for (const auto& w : xpp) out2t.push_back(shear_initial(g, w, 2 * T));
  const auto li_out = localize(g, out2t, K);
  ev.trim_visible = !li_xpp.same_shapes(li_out);
  ev.mismatch = !li_in.same_shapes(li_out);
  return ev;
}

// ---------------------------------------------------------------------------
// Labeled doubling and the dyadic cascade.
// ---------------------------------------------------------------------------

template <class Ops>
LabeledMeasure<typename Ops::V> double_labeled(Ops& ops, const LabeledMeasure<typename Ops::V>& z, int T,
                                               int m, uint32_t salt_base) {
  using V = typename Ops::V;
  if (m < 1 || static_cast<double>(m) > std::sqrt(static_cast<double>(T)) + 1e-9)
    throw std::invalid_argument("double_labeled: need m <= sqrt(T)");
  auto& g = ops.graph();
  const Field& f = ops.field();
  LabeledMeasure<V> out;
  for (int band = 1; band <= m; ++band) {
    const double lo = static_cast<double>(band - 1) / m, hi = static_cast<double>(band) / m;
    TrajMeasure<V> stripped;
    for (const auto& lw : z)
      if (lw.label >= lo && (lw.label < hi || (band == m && lw.label <= hi))) stripped.push_back(lw.w);
    const double v = 1.0 / (static_cast<double>(T) * m);
    const uint32_t salt = salt_base + static_cast<uint32_t>(band);
    auto doubled = ops.double_unlabeled(stripped, v, T, salt, nullptr, nullptr);
    // fresh uniform labels inside the band, keyed by (start vertex, occurrence)
    std::vector<V> anchors(doubled.size());
    for (size_t i = 0; i < doubled.size(); ++i) anchors[i] = doubled[i].start;
    std::vector<uint32_t> occ;
    if constexpr (std::is_same_v<V, LatticeVertex>) {
      occ = canonical_occs(doubled, anchors, vertex_less);
    } else {
      occ = canonical_occs(doubled, anchors,
                           [&](V a, V b) { return vertex_less_tree(g, a, b); });
    }
    for (size_t i = 0; i < doubled.size(); ++i) {
      const double u = f.u01(Lane::Relabel, g.key(doubled[i].start), pack_idx3(salt, occ[i], 8));
      out.push_back({std::move(doubled[i]), lo + u / m});
    }
  }
  return out;
}

struct CascadeLevel {
  int n = 0;
  int T = 1;
  int m = 1;
  double d_K = 0.0;
  size_t members = 0;
};

// Z^0 ~ Q_1, Z^{n+1} = doubled Z^n with T_n = 2^n, m_n = floor(T_n^{1/4}).
template <class Ops>
std::vector<CascadeLevel> cascade(Ops& ops, int n_max, const KSet<typename Ops::V>& K,
                                  LabeledMeasure<typename Ops::V>* top_out) {
  using V = typename Ops::V;
  auto& g = ops.graph();
  LabeledMeasure<V> z = sample_fli_labeled(g, ops.starts(), ops.field(), 1);
  std::vector<CascadeLevel> levels;
  for (int n = 0; n < n_max; ++n) {
    const int T = 1 << n;
    const int m = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(T), 0.25))));
    auto znext = double_labeled(ops, z, T, m, 32u * static_cast<uint32_t>(n + 1));
    CascadeLevel lev;
    lev.n = n;
    lev.T = T;
    lev.m = m;
    lev.members = znext.size();
    lev.d_K = local_distance(localize(g, z, K), localize(g, znext, K));
    levels.push_back(lev);
    z = std::move(znext);
  }
  if (top_out) *top_out = std::move(z);
  return levels;
}

// ---------------------------------------------------------------------------
// Translation helpers for the bit-exact equivariance harness: the shifted run
// uses a stream-shifted lattice plus a co-shifted window anchor, and the two
// outputs must agree byte for byte after shifting back.
// ---------------------------------------------------------------------------

inline TrajMeasure<LatticeVertex> translate_measure(const TrajMeasure<LatticeVertex>& m,
                                                    const LatticeVertex& s) {
  TrajMeasure<LatticeVertex> out = m;
  for (auto& w : out) {
    w.start = lattice_shift(w.start, s);
    w.end = lattice_shift(w.end, s);
  }
  return out;
}

inline bool measures_identical(TrajMeasure<LatticeVertex> a, TrajMeasure<LatticeVertex> b) {
  auto lessw = [](const Traj<LatticeVertex>& x, const Traj<LatticeVertex>& y) {
    if (x.start.c != y.start.c) return x.start.c < y.start.c;
    return x.steps < y.steps;
  };
  std::sort(a.begin(), a.end(), lessw);
  std::sort(b.begin(), b.end(), lessw);
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].start != b[i].start || a[i].steps != b[i].steps) return false;
  return true;
}

inline bool labeled_identical(LabeledMeasure<LatticeVertex> a, LabeledMeasure<LatticeVertex> b) {
  auto lessw = [](const LabeledTraj<LatticeVertex>& x, const LabeledTraj<LatticeVertex>& y) {
    if (x.w.start.c != y.w.start.c) return x.w.start.c < y.w.start.c;
    if (x.w.steps != y.w.steps) return x.w.steps < y.w.steps;
    return x.label < y.label;
  };
  std::sort(a.begin(), a.end(), lessw);
  std::sort(b.begin(), b.end(), lessw);
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].w.start != b[i].w.start || a[i].w.steps != b[i].w.steps || a[i].label != b[i].label)
      return false;
  return true;
}

inline LabeledMeasure<LatticeVertex> translate_measure(const LabeledMeasure<LatticeVertex>& m,
                                                       const LatticeVertex& s) {
  LabeledMeasure<LatticeVertex> out = m;
  for (auto& lw : out) {
    lw.w.start = lattice_shift(lw.w.start, s);
    lw.w.end = lattice_shift(lw.w.end, s);
  }
  return out;
}

}  // namespace rif

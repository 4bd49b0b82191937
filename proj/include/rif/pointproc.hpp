#pragma once

#include <algorithm>
#include <cstring>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rif/graph.hpp"
#include "rif/walk.hpp"

namespace rif {

// Small finite vertex set K.
template <class V>
struct KSet {
  std::vector<V> verts;

  bool contains(const V& v) const {
    for (const auto& k : verts) {
      if (k == v) return true;
    }
    return false;
  }
  size_t size() const { return verts.size(); }
};

// Canonical byte key of a finite path: 128-bit start identity + step bytes.
// Two trajectories have equal keys iff they are the same vertex sequence.
template <class G>
std::string shape_key(const G& g, const Traj<typename G::Vertex>& w) {
  const VertexKey k = g.key(w.start);
  std::string s;
  s.resize(16 + w.steps.size());
  std::memcpy(s.data(), &k.a, 8);
  std::memcpy(s.data() + 8, &k.b, 8);
  if (!w.steps.empty()) std::memcpy(s.data() + 16, w.steps.data(), w.steps.size());
  return s;
}

template <class V>
struct LabeledTraj {
  Traj<V> w;
  double label = 0.0;
};

template <class V>
using TrajMeasure = std::vector<Traj<V>>;
template <class V>
using LabeledMeasure = std::vector<LabeledTraj<V>>;

// Local image on K: multiset of trajectory shapes with their labels.
template <class V>
struct LocalImage {
  struct Entry {
    Traj<V> rep;                 // one representative path
    std::vector<double> labels;  // one entry per copy
  };
  std::map<std::string, Entry> shapes;

  size_t total() const {
    size_t n = 0;
    for (const auto& [k, e] : shapes) n += e.labels.size();
    return n;
  }
  bool empty() const { return shapes.empty(); }

  bool same_shapes(const LocalImage& o) const {
    if (shapes.size() != o.shapes.size()) return false;
    auto a = shapes.begin();
    auto b = o.shapes.begin();
    for (; a != shapes.end(); ++a, ++b) {
      if (a->first != b->first || a->second.labels.size() != b->second.labels.size()) return false;
    }
    return true;
  }
};

// Lambda_K of one trajectory: the sub-path from the first to the last visit
// of K, reindexed from zero; empty if the path misses K.
template <class G>
std::optional<Traj<typename G::Vertex>> localize_traj(G& g, const Traj<typename G::Vertex>& w,
                                                      const KSet<typename G::Vertex>& K) {
  using V = typename G::Vertex;
  ptrdiff_t first = -1, last = -1;
  V cur = w.start;
  V first_v{}, last_v{};
  for (size_t n = 0;; ++n) {
    if (K.contains(cur)) {
      if (first < 0) {
        first = static_cast<ptrdiff_t>(n);
        first_v = cur;
      }
      last = static_cast<ptrdiff_t>(n);
      last_v = cur;
    }
    if (n == w.steps.size()) break;
    cur = g.neighbor(cur, w.steps[n]);
  }
  if (first < 0) return std::nullopt;
  Traj<V> out;
  out.start = first_v;
  out.end = last_v;
  out.steps.assign(w.steps.begin() + first, w.steps.begin() + last);
  return out;
}

template <class G>
void localize_into(G& g, const Traj<typename G::Vertex>& w, double label,
                   const KSet<typename G::Vertex>& K, LocalImage<typename G::Vertex>& img) {
  auto sub = localize_traj(g, w, K);
  if (!sub) return;
  auto key = shape_key(g, *sub);
  auto& e = img.shapes[key];
  if (e.labels.empty()) e.rep = *sub;
  e.labels.push_back(label);
}

template <class G>
LocalImage<typename G::Vertex> localize(G& g, const TrajMeasure<typename G::Vertex>& om,
                                        const KSet<typename G::Vertex>& K) {
  LocalImage<typename G::Vertex> img;
  for (const auto& w : om) localize_into(g, w, 0.0, K, img);
  return img;
}

template <class G>
LocalImage<typename G::Vertex> localize(G& g, const LabeledMeasure<typename G::Vertex>& om,
                                        const KSet<typename G::Vertex>& K) {
  LocalImage<typename G::Vertex> img;
  for (const auto& lw : om) localize_into(g, lw.w, lw.label, K, img);
  return img;
}

// Second-stage localization (compatibility checks): feed image members back.
template <class G>
LocalImage<typename G::Vertex> localize(G& g, const LocalImage<typename G::Vertex>& im,
                                        const KSet<typename G::Vertex>& K) {
  LocalImage<typename G::Vertex> img;
  for (const auto& [key, e] : im.shapes)
    for (double lab : e.labels) localize_into(g, e.rep, lab, K, img);
  return img;
}

// ---------------------------------------------------------------------------
// Shearing maps on W_{T'} (Eqs. of the initial/terminal sub-trajectory).
// ---------------------------------------------------------------------------

template <class G>
Traj<typename G::Vertex> shear_initial(G& g, const Traj<typename G::Vertex>& w, size_t T) {
  if (T < 1 || T > w.length()) throw std::invalid_argument("shear length mismatch");
  Traj<typename G::Vertex> out;
  out.start = w.start;
  out.steps.assign(w.steps.begin(), w.steps.begin() + (T - 1));
  typename G::Vertex cur = w.start;
  for (uint8_t k : out.steps) cur = g.neighbor(cur, k);
  out.end = cur;
  return out;
}

template <class G>
Traj<typename G::Vertex> shear_terminal(G& g, const Traj<typename G::Vertex>& w, size_t T) {
  if (T < 1 || T > w.length()) throw std::invalid_argument("shear length mismatch");
  const size_t from = w.length() - T;
  Traj<typename G::Vertex> out;
  typename G::Vertex cur = w.start;
  for (size_t i = 0; i < from; ++i) cur = g.neighbor(cur, w.steps[i]);
  out.start = cur;
  out.steps.assign(w.steps.begin() + from, w.steps.end());
  out.end = w.end;
  return out;
}

template <class G>
typename G::Vertex shear_step(G& g, const Traj<typename G::Vertex>& w, size_t n) {
  if (n >= w.length()) throw std::invalid_argument("shear step out of range");
  typename G::Vertex cur = w.start;
  for (size_t i = 0; i < n; ++i) cur = g.neighbor(cur, w.steps[i]);
  return cur;
}

// Middle segment of length T occupying positions [from, from+T-1].
template <class G>
Traj<typename G::Vertex> shear_segment(G& g, const Traj<typename G::Vertex>& w, size_t from, size_t T) {
  if (from + T > w.length()) throw std::invalid_argument("shear segment out of range");
  Traj<typename G::Vertex> out;
  typename G::Vertex cur = w.start;
  for (size_t i = 0; i < from; ++i) cur = g.neighbor(cur, w.steps[i]);
  out.start = cur;
  out.steps.assign(w.steps.begin() + from, w.steps.begin() + from + (T - 1));
  for (size_t i = 0; i + 1 < T; ++i) cur = g.neighbor(cur, out.steps[i]);
  out.end = cur;
  return out;
}

// ---------------------------------------------------------------------------
// Exact 1-Wasserstein distance between equal-size empirical measures on the
// line and the local pseudometric d_K.
// ---------------------------------------------------------------------------

inline double w1_empirical(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("w1: unequal cardinality");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / a.size();
}

// d_K on localized measures: 1 if any shape count differs, otherwise the max
// over shapes of the W1 distance of the normalized label multisets. Two empty
// images have distance 0.
template <class V>
double local_distance(const LocalImage<V>& A, const LocalImage<V>& B) {
  if (!A.same_shapes(B)) return 1.0;
  double worst = 0.0;
  auto a = A.shapes.begin();
  auto b = B.shapes.begin();
  for (; a != A.shapes.end(); ++a, ++b) worst = std::max(worst, w1_empirical(a->second.labels, b->second.labels));
  return worst;
}

}  // namespace rif

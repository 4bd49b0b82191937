#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rif/graph.hpp"
#include "rif/pointproc.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Truncated equilibrium measure e_K^s(x) = P_x(X(n) not in K for 0 < n <= s)
// and capacity via dyadic-horizon truncation. The tree families use exact
// one-dimensional chains; other cases run a dense avoidance DP over a ball
// around K (horizon-capped).
// ---------------------------------------------------------------------------

// Generic avoidance DP. avoid[m][y] = P_y(X(1..m) misses K). Domain: ball of
// radius s around K; the walk cannot re-enter K from outside it.
template <class G>
class AvoidDP {
 public:
  using Vertex = typename G::Vertex;

  AvoidDP(G& g, const KSet<Vertex>& K, int s, size_t max_vertices = 20000000) : K_(K) {
    for (const auto& k : K.verts) {
      if (idx_.emplace(k, verts_.size()).second) {
        verts_.push_back(k);
        depth_.push_back(0);
      }
    }
    size_t head = 0;
    while (head < verts_.size()) {
      const Vertex x = verts_[head];
      const int dx = depth_[head];
      ++head;
      if (dx == s) continue;
      for (int k = 0; k < g.degree(); ++k) {
        const Vertex y = g.neighbor(x, k);
        if (idx_.emplace(y, verts_.size()).second) {
          verts_.push_back(y);
          depth_.push_back(dx + 1);
          if (verts_.size() > max_vertices)
            throw std::runtime_error("equilibrium horizon too large for memory budget");
        }
      }
    }
    nbr_.assign(verts_.size() * g.degree(), -1);
    in_k_.assign(verts_.size(), 0);
    for (size_t i = 0; i < verts_.size(); ++i) {
      in_k_[i] = K.contains(verts_[i]) ? 1 : 0;
      for (int k = 0; k < g.degree(); ++k) {
        auto it = idx_.find(g.neighbor(verts_[i], k));
        nbr_[i * g.degree() + k] = it == idx_.end() ? -1 : static_cast<int64_t>(it->second);
      }
    }
    cur_.assign(verts_.size(), 1.0);
    deg_ = g.degree();
    m_ = 0;
  }

  // Advance the DP to horizon m (monotone).
  void advance_to(int m) {
    std::vector<double> next(verts_.size(), 0.0);
    for (; m_ < m; ++m_) {
      for (size_t i = 0; i < verts_.size(); ++i) {
        double s = 0.0;
        for (int k = 0; k < deg_; ++k) {
          const int64_t j = nbr_[i * deg_ + k];
          // walking out of the enumerated ball means the walk escaped К for good
          // within this horizon (the ball has radius >= remaining steps).
          if (j < 0)
            s += 1.0;
          else if (!in_k_[static_cast<size_t>(j)])
            s += cur_[static_cast<size_t>(j)];
        }
        next[i] = s / deg_;
      }
      std::swap(cur_, next);
    }
  }

  double value(const Vertex& x) const {
    auto it = idx_.find(x);
    if (it == idx_.end()) throw std::invalid_argument("e_K^s: x outside DP domain");
    return cur_[it->second];
  }

 private:
  KSet<Vertex> K_;
  std::vector<Vertex> verts_;
  std::vector<int> depth_;
  std::unordered_map<Vertex, size_t> idx_;
  std::vector<int64_t> nbr_;
  std::vector<uint8_t> in_k_;
  std::vector<double> cur_;
  int deg_ = 0;
  int m_ = 0;
};

// Exact radial chain for the d-regular tree: after the sweep, avoid_final(k)
// = P(from distance k, `horizon` more steps never hit the root).
class TreeAvoidChain {
 public:
  TreeAvoidChain(int deg, int horizon) : d_(deg), m_(std::max(0, horizon)) {
    cur_.assign(m_ + 3, 1.0);
    std::vector<double> next(m_ + 3, 1.0);
    for (int m = 1; m <= m_; ++m) {
      for (int k = 1; k <= m_ + 1; ++k) {
        const double down = k > 1 ? cur_[k - 1] : 0.0;
        next[k] = (down + (d_ - 1) * cur_[k + 1]) / d_;
      }
      std::swap(cur_, next);
    }
  }

  double avoid_final(int k) const {
    if (k <= 0) return 0.0;
    if (k >= static_cast<int>(cur_.size())) return 1.0;
    return cur_[k];
  }

 private:
  int d_, m_;
  std::vector<double> cur_;
};

// e_K^s on the d-regular tree for K = {o} or K = {o, child}: both reduce to
// the radial chain because the tree splits at K.
inline double tree_eq_measure_trunc(int deg, int ksize, int s) {
  if (s <= 0) return 1.0;
  TreeAvoidChain chain(deg, s - 1);
  if (ksize == 1) return chain.avoid_final(1);  // first step lands at distance 1
  // K = edge {o, n}: from o, stepping to n fails; the other d-1 neighbors
  // start the radial chain on o's side.
  return (static_cast<double>(deg - 1) / deg) * chain.avoid_final(1);
}

struct CapacityResult {
  double value = 0.0;
  double gap = 0.0;  // difference between the last two dyadic horizons
  int horizon = 0;
  bool converged = false;
};

// Capacity of {o} (or an edge pair) on the d-regular tree with a dyadic
// Cauchy diagnostic. Converges geometrically.
inline CapacityResult tree_capacity(int deg, int ksize, double tol, int s0 = 16, int s_cap = 1 << 14) {
  CapacityResult r;
  double prev = ksize * tree_eq_measure_trunc(deg, ksize, s0);
  for (int s = 2 * s0; s <= s_cap; s *= 2) {
    const double cur = ksize * tree_eq_measure_trunc(deg, ksize, s);
    r.gap = prev - cur;
    r.value = cur;
    r.horizon = s;
    if (r.gap < tol) {
      r.converged = true;
      return r;
    }
    prev = cur;
  }
  return r;
}

// Generic capacity through the avoidance DP (lattice, grandparent; horizon
// capped, gap reported honestly).
template <class G>
CapacityResult dense_capacity(G& g, const KSet<typename G::Vertex>& K, double tol, int s0 = 8,
                              int s_cap = 64) {
  CapacityResult r;
  AvoidDP<G> dp(g, K, s_cap);
  auto total = [&](int s) {
    dp.advance_to(s);
    double t = 0.0;
    for (const auto& x : K.verts) t += dp.value(x);
    return t;
  };
  double prev = total(s0);
  for (int s = 2 * s0; s <= s_cap; s *= 2) {
    const double cur = total(s);
    r.gap = prev - cur;
    r.value = cur;
    r.horizon = s;
    if (r.gap < tol) {
      r.converged = true;
      return r;
    }
    prev = cur;
  }
  return r;
}

template <class G>
double eq_measure_trunc(G& g, const KSet<typename G::Vertex>& K, const typename G::Vertex& x, int s) {
  if (!K.contains(x)) throw std::invalid_argument("eq_measure_trunc: x not in K");
  if (s <= 0) return 1.0;
  AvoidDP<G> dp(g, K, s);
  dp.advance_to(s);
  return dp.value(x);
}

}  // namespace rif

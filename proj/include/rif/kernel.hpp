#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rif/graph.hpp"
#include "rif/prng.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Walk kernels p_n(x,y), cached by displacement class: coordinate-factorized
// on the lattice, distance profile on the regular tree, dense DP otherwise.
// ---------------------------------------------------------------------------

inline double binom_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lg + k * std::log(p) + (n - k) * std::log1p(-p));
}

// P(1D +-1 walk of m steps displaces by delta), m <= horizon.
class Walk1D {
 public:
  explicit Walk1D(int horizon) : m_(horizon) {
    rows_.resize(m_ + 1);
    rows_[0] = {1.0};
    for (int m = 1; m <= m_; ++m) {
      rows_[m].assign(2 * m + 1, 0.0);
      for (int i = 0; i < 2 * (m - 1) + 1; ++i) {
        rows_[m][i] += 0.5 * rows_[m - 1][i];
        rows_[m][i + 2] += 0.5 * rows_[m - 1][i];
      }
    }
  }

  int horizon() const { return m_; }

  double at(int m, int delta) const {
    if (m < 0 || m > m_ || std::abs(delta) > m) return 0.0;
    return rows_[m][delta + m];
  }

 private:
  int m_;
  std::vector<std::vector<double>> rows_;
};

// n-step kernel on Z^d for the one-coordinate-at-a-time walk.
class LatticeKernel {
 public:
  LatticeKernel(int dim, int horizon) : d_(dim), n_(horizon), w1_(horizon) {}

  int horizon() const { return n_; }

  // p_n(0, delta) by summing over per-coordinate step allocations.
  double eval(int n, const std::array<int32_t, 4>& delta) const {
    if (n < 0 || n > n_) return 0.0;
    int64_t l1 = 0;
    for (int j = 0; j < d_; ++j) l1 += std::abs(delta[j]);
    if (l1 > n || ((l1 ^ n) & 1)) return 0.0;
    double total = 0.0;
    if (d_ == 3) {
      for (int n1 = std::abs(delta[0]); n1 <= n; n1 += 2) {
        const double w1 = binom_pmf(n, n1, 1.0 / 3.0) * w1_.at(n1, delta[0]);
        if (w1 == 0.0) continue;
        const int rest = n - n1;
        for (int n2 = std::abs(delta[1]); n2 <= rest; n2 += 2) {
          const int n3 = rest - n2;
          if (std::abs(delta[2]) > n3 || ((n3 ^ std::abs(delta[2])) & 1)) continue;
          total += w1 * binom_pmf(rest, n2, 0.5) * w1_.at(n2, delta[1]) * w1_.at(n3, delta[2]);
        }
      }
    } else {
      for (int n1 = std::abs(delta[0]); n1 <= n; n1 += 2) {
        const double w1 = binom_pmf(n, n1, 1.0 / 4.0) * w1_.at(n1, delta[0]);
        if (w1 == 0.0) continue;
        for (int n2 = std::abs(delta[1]); n2 <= n - n1; n2 += 2) {
          const double w2 = w1 * binom_pmf(n - n1, n2, 1.0 / 3.0) * w1_.at(n2, delta[1]);
          if (w2 == 0.0) continue;
          const int rest = n - n1 - n2;
          for (int n3 = std::abs(delta[2]); n3 <= rest; n3 += 2) {
            const int n4 = rest - n3;
            if (std::abs(delta[3]) > n4 || ((n4 ^ std::abs(delta[3])) & 1)) continue;
            total += w2 * binom_pmf(rest, n3, 0.5) * w1_.at(n3, delta[2]) * w1_.at(n4, delta[3]);
          }
        }
      }
    }
    return total;
  }

  double eval(int n, const LatticeVertex& x, const LatticeVertex& y) const {
    std::array<int32_t, 4> delta{};
    for (int j = 0; j < d_; ++j) delta[j] = y.c[j] - x.c[j];
    return eval(n, delta);
  }

  const Walk1D& walk1d() const { return w1_; }
  int dim() const { return d_; }

 private:
  int d_;
  int n_;
  Walk1D w1_;
};

// Dense table of p_L(0, delta) over the l1-ball of radius r (d = 3 only; the
// matching and bridges run on Z^3 windows).
struct LatticeBallTable {
  int L = 0;
  int r = 0;
  int side = 0;
  std::vector<float> p;  // indexed by ((dx+r)*side + dy+r)*side + dz+r
  double max_p = 0.0;

  double at(int dx, int dy, int dz) const {
    if (std::abs(dx) > r || std::abs(dy) > r || std::abs(dz) > r) return 0.0;
    if (std::abs(dx) + std::abs(dy) + std::abs(dz) > r) return 0.0;
    return p[(static_cast<size_t>(dx + r) * side + (dy + r)) * side + (dz + r)];
  }
};

inline LatticeBallTable make_ball_table(const LatticeKernel& k, int L, int r) {
  LatticeBallTable t;
  t.L = L;
  t.r = r;
  t.side = 2 * r + 1;
  t.p.assign(static_cast<size_t>(t.side) * t.side * t.side, 0.0f);
  for (int dx = -r; dx <= r; ++dx)
    for (int dy = -r; dy <= r; ++dy)
      for (int dz = -r; dz <= r; ++dz) {
        if (std::abs(dx) + std::abs(dy) + std::abs(dz) > r) continue;
        const double v = k.eval(L, {dx, dy, dz, 0});
        t.p[(static_cast<size_t>(dx + r) * t.side + (dy + r)) * t.side + (dz + r)] = static_cast<float>(v);
        t.max_p = std::max(t.max_p, v);
      }
  return t;
}

// Support radius used for surface growth and the synthetic field layer; full
// for L <= 16, else >= 5 sigma of the kernel (see decisions ledger).
inline int slt_support_radius(int L, int dim) {
  if (L <= 16) return L;
  const int r = static_cast<int>(std::ceil(5.2 * std::sqrt(static_cast<double>(L) / dim))) + 2;
  return std::min(L, r);
}

// ---------------------------------------------------------------------------
// Regular tree: distance-profile chain. p_n(x,y) = rho_n(k) / |sphere(k)|.
// ---------------------------------------------------------------------------

class TreeKernel {
 public:
  TreeKernel(int deg, int horizon) : d_(deg), n_(horizon) {
    rho_.assign(n_ + 1, std::vector<double>(n_ + 2, 0.0));
    rho_[0][0] = 1.0;
    const double down = 1.0 / d_, up = 1.0 - down;
    for (int n = 1; n <= n_; ++n) {
      rho_[n][1] += rho_[n - 1][0];
      for (int k = 1; k <= n; ++k) {
        if (rho_[n - 1][k] == 0.0) continue;
        if (k == 1)
          rho_[n][0] += down * rho_[n - 1][k];
        else
          rho_[n][k - 1] += down * rho_[n - 1][k];
        rho_[n][k + 1] += up * rho_[n - 1][k];
      }
    }
    sphere_.assign(n_ + 2, 1.0);
    for (int k = 1; k <= n_ + 1; ++k) sphere_[k] = d_ * std::pow(static_cast<double>(d_ - 1), k - 1);
  }

  int horizon() const { return n_; }
  double rho(int n, int k) const { return (k < 0 || k > n_ + 1 || n < 0 || n > n_) ? 0.0 : rho_[n][k]; }
  double sphere(int k) const { return k == 0 ? 1.0 : sphere_[k]; }

  double eval(int n, int64_t dist) const {
    if (n < 0 || n > n_ || dist > n || dist < 0) return 0.0;
    return rho_[n][dist] / sphere(static_cast<int>(dist));
  }

 private:
  int d_;
  int n_;
  std::vector<std::vector<double>> rho_;
  std::vector<double> sphere_;
};

// ---------------------------------------------------------------------------
// Dense kernel field p_n(.,y) for an arbitrary family over a BFS ball (used
// for Grandparent and as the oracle in kernel unit tests). Each DP slice is
// renormalized after asserting its drift is below 1e-12.
// ---------------------------------------------------------------------------

template <class G>
class DenseKernelField {
 public:
  using Vertex = typename G::Vertex;

  DenseKernelField(G& g, const Vertex& base, int horizon, size_t max_vertices = 40000000)
      : base_(base), n_(horizon) {
    // Ball of radius `horizon` around the base carries every reachable slice.
    verts_.push_back(base);
    idx_[base] = 0;
    std::vector<int> depth{0};
    size_t head = 0;
    while (head < verts_.size()) {
      const Vertex x = verts_[head];
      const int dx = depth[head];
      ++head;
      if (dx == horizon) continue;
      for (int k = 0; k < g.degree(); ++k) {
        const Vertex y = g.neighbor(x, k);
        if (idx_.emplace(y, verts_.size()).second) {
          verts_.push_back(y);
          depth.push_back(dx + 1);
          if (verts_.size() > max_vertices) throw std::runtime_error("kernel horizon too large for memory budget");
        }
      }
    }
    nbr_.assign(verts_.size() * g.degree(), -1);
    for (size_t i = 0; i < verts_.size(); ++i)
      for (int k = 0; k < g.degree(); ++k) {
        auto it = idx_.find(g.neighbor(verts_[i], k));
        nbr_[i * g.degree() + k] = it == idx_.end() ? -1 : static_cast<int64_t>(it->second);
      }
    slices_.assign(n_ + 1, std::vector<double>(verts_.size(), 0.0));
    slices_[0][0] = 1.0;
    const double inv = 1.0 / g.degree();
    for (int n = 1; n <= n_; ++n) {
      auto& cur = slices_[n];
      const auto& prev = slices_[n - 1];
      for (size_t i = 0; i < verts_.size(); ++i) {
        if (prev[i] == 0.0) continue;
        const double m = prev[i] * inv;
        for (int k = 0; k < g.degree(); ++k) {
          const int64_t j = nbr_[i * g.degree() + k];
          if (j >= 0) cur[static_cast<size_t>(j)] += m;
        }
      }
      double sum = 0.0;
      for (double v : cur) sum += v;
      if (std::abs(sum - 1.0) > 1e-12) throw std::runtime_error("kernel slice drift exceeds 1e-12");
      const double scale = 1.0 / sum;
      for (double& v : cur) v *= scale;
    }
  }

  int horizon() const { return n_; }
  const Vertex& base() const { return base_; }

  double at(int n, const Vertex& x) const {
    auto it = idx_.find(x);
    if (it == idx_.end() || n < 0 || n > n_) return 0.0;
    return slices_[n][it->second];
  }

  double slice_sum(int n) const {
    double s = 0.0;
    for (double v : slices_[n]) s += v;
    return s;
  }

 private:
  Vertex base_;
  int n_;
  std::vector<Vertex> verts_;
  std::unordered_map<Vertex, size_t> idx_;
  std::vector<int64_t> nbr_;
  std::vector<std::vector<double>> slices_;
};

// ---------------------------------------------------------------------------
// Return-probability profiles p_n(o,o) and the n^{3/2} rescaling.
// ---------------------------------------------------------------------------

struct HeatKernelRow {
  int n;
  double p;
  double rescaled;  // n^{3/2} * p
};

// Lattice closed-walk probabilities via allocation over coordinates:
// P_j(m) = P(walk using j coordinates returns), conditioning on the number of
// steps spent in coordinate j.
inline std::vector<HeatKernelRow> lattice_heat_profile(int dim, int n_max) {
  Walk1D w1(n_max);
  std::vector<double> prev(n_max + 1), cur(n_max + 1);
  for (int m = 0; m <= n_max; ++m) prev[m] = w1.at(m, 0);
  for (int j = 2; j <= dim; ++j) {
    const double pj = 1.0 / j;
    for (int m = 0; m <= n_max; ++m) {
      double s = 0.0;
      for (int k = 0; k <= m; k += 2) s += binom_pmf(m, k, pj) * w1.at(k, 0) * prev[m - k];
      cur[m] = s;
    }
    std::swap(prev, cur);
  }
  std::vector<HeatKernelRow> out;
  out.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    out.push_back({n, prev[n], n == 0 ? 0.0 : std::pow(static_cast<double>(n), 1.5) * prev[n]});
  return out;
}

inline std::vector<HeatKernelRow> tree_heat_profile(int deg, int n_max) {
  TreeKernel k(deg, n_max);
  std::vector<HeatKernelRow> out;
  out.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    out.push_back({n, k.rho(n, 0), n == 0 ? 0.0 : std::pow(static_cast<double>(n), 1.5) * k.rho(n, 0)});
  return out;
}

}  // namespace rif

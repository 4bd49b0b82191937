#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rif/graph.hpp"
#include "rif/kernel.hpp"
#include "rif/pointproc.hpp"
#include "rif/prng.hpp"

namespace rif {

// ---------------------------------------------------------------------------
// Soft-local-time matching of two Poisson clouds on the vertex set.
//
// Rounds: fresh i.i.d. priorities per remaining R1 point, the local minima
// within graph distance 2L are selected; each selected point grows the
// surface g by eta_i * p_L(x_i, .) until it consumes the first field arrival
// above g, which becomes its pair. The field is the R2 labels on [0,alpha]
// extended above alpha by unit-rate Exponential gaps per vertex, materialized
// up to a certified ceiling (violations of the ceiling are counted, never
// silently ignored).
// ---------------------------------------------------------------------------

struct SltParams {
  double alpha = 0.5;
  int L = 6;
  uint32_t salt = 0;            // stream namespace (band/level)
  double eta_margin = 25.0;     // ceiling: alpha + 6 sd + margin * max p
  uint32_t round_cap = 1 << 20; // defensive only; must not trigger
};

template <class V>
struct SltPoint {
  V x{};
  uint32_t occ = 0;  // canonical occurrence among same-vertex points
};

template <class V>
struct SltPair {
  V y{};
  double t = 0.0;      // consumed arrival height
  double eta = 0.0;    // Exp(1) growth amount
  uint32_t round = 0;  // selection round
  bool real = false;   // t <= alpha: consumed an actual R2 label
  uint32_t r2_occ = 0; // occurrence of the consumed R2 point (when real)
};

template <class V>
struct SltResult {
  std::vector<SltPair<V>> pairs;  // aligned with the input R1 points
  uint32_t rounds = 0;
  uint64_t guard_violations = 0;  // certified-ceiling failures (expect 0)
  std::vector<double> g_probe;    // final surface at the probe vertices
};

// ------------------------------- lattice ----------------------------------

class SltLattice {
 public:
  using V = LatticeVertex;

  SltLattice(Lattice& g, const LatticeWindow& field_win, const LatticeBallTable& table,
             const TreeKernel* /*unused*/, const Field& f, const SltParams& par)
      : g_(g), win_(field_win), tab_(table), f_(f), par_(par) {
    if (g.dim() != 3) throw std::invalid_argument("lattice slt supports d=3");
    rt_ = tab_.r;
    side_ = 2 * win_.radius() + 1;
    gsurf_.assign(win_.size(), 0.0);
    // radial upper envelope of the kernel by l1 distance
    maxp_ge_.assign(rt_ + 2, 0.0);
    for (int dx = -rt_; dx <= rt_; ++dx)
      for (int dy = -rt_; dy <= rt_; ++dy)
        for (int dz = -rt_; dz <= rt_; ++dz) {
          const int l1 = std::abs(dx) + std::abs(dy) + std::abs(dz);
          if (l1 > rt_) continue;
          maxp_ge_[l1] = std::max(maxp_ge_[l1], tab_.at(dx, dy, dz));
        }
    for (int r = rt_ - 1; r >= 0; --r) maxp_ge_[r] = std::max(maxp_ge_[r], maxp_ge_[r + 1]);

    // arrival 3-d coarse grid
    cell_ = std::max(4, rt_ / 3);
    ncell_ = (side_ + cell_ - 1) / cell_;
    cells_.assign(static_cast<size_t>(ncell_) * ncell_ * ncell_, {});
    cellgmax_.assign(cells_.size(), 0.0);
  }

  // R2 points receive uniform [0, alpha] labels keyed by (vertex, occ); every
  // field vertex also gets Exp(1)-gap arrivals on (alpha, H].
  void build_field(const std::vector<SltPoint<V>>& r2) {
    const double p2l = p2L_upper();
    height_ = par_.alpha + 6.0 * std::sqrt(std::max(0.0, 2.0 * par_.alpha * p2l)) +
              par_.eta_margin * tab_.max_p;
    for (const auto& pt : r2) {
      if (!win_.contains(pt.x)) throw std::invalid_argument("slt: R2 point outside field window");
      const double t = par_.alpha * f_.u01(Lane::SltR2Label, g_.key(pt.x), pack_idx3(par_.salt, pt.occ, 1));
      push_arrival(pt.x, t, true, pt.occ);
    }
    for (size_t i = 0; i < win_.size(); ++i) {
      const V x = win_.vertex(i);
      const VertexKey key = g_.key(x);
      double t = par_.alpha;
      for (uint32_t j = 0;; ++j) {
        t += f_.exp1(Lane::FieldGap, key, pack_idx3(par_.salt, j, 2));
        if (t > height_) break;
        push_arrival(x, t, false, j);
      }
    }
    for (auto& c : cells_) {
      std::sort(c.begin(), c.end(), [](const Arrival& a, const Arrival& b) { return a.t < b.t; });
    }
  }

  SltResult<V> match(const std::vector<SltPoint<V>>& r1, const std::vector<V>& probes) {
    SltResult<V> res;
    res.pairs.assign(r1.size(), {});
    const int twoL = 2 * par_.L;

    // selection grid with cell side 2L (neighbors live in the 27 surrounding cells)
    const int selcell = std::max(1, twoL);
    const int nsel = (side_ + selcell - 1) / selcell;
    std::vector<std::vector<uint32_t>> selgrid(static_cast<size_t>(nsel) * nsel * nsel);
    auto selcell_of = [&](const V& v) {
      const int a = (v.c[0] - win_.center().c[0] + win_.radius()) / selcell;
      const int b = (v.c[1] - win_.center().c[1] + win_.radius()) / selcell;
      const int c = (v.c[2] - win_.center().c[2] + win_.radius()) / selcell;
      return (static_cast<size_t>(a) * nsel + b) * nsel + c;
    };

    std::vector<uint32_t> alive(r1.size());
    for (uint32_t i = 0; i < alive.size(); ++i) alive[i] = i;
    std::vector<std::pair<double, uint32_t>> order;
    std::vector<uint32_t> selected;

    uint32_t round = 0;
    while (!alive.empty()) {
      if (round >= par_.round_cap) throw std::runtime_error("slt: round cap hit");
      order.clear();
      order.reserve(alive.size());
      for (uint32_t i : alive)
        order.emplace_back(
            f_.u01(Lane::SltPriority, g_.key(r1[i].x), pack_idx(pack_idx3(par_.salt, r1[i].occ, 9), round)), i);
      std::sort(order.begin(), order.end());
      for (auto& cl : selgrid) cl.clear();
      selected.clear();
      for (const auto& [u, i] : order) {
        const V& x = r1[i].x;
        const int ca = (x.c[0] - win_.center().c[0] + win_.radius()) / selcell;
        const int cb = (x.c[1] - win_.center().c[1] + win_.radius()) / selcell;
        const int cc = (x.c[2] - win_.center().c[2] + win_.radius()) / selcell;
        bool defeated = false;
        for (int da = -1; da <= 1 && !defeated; ++da)
          for (int db = -1; db <= 1 && !defeated; ++db)
            for (int dc = -1; dc <= 1 && !defeated; ++dc) {
              const int a = ca + da, b = cb + db, c = cc + dc;
              if (a < 0 || b < 0 || c < 0 || a >= nsel || b >= nsel || c >= nsel) continue;
              for (uint32_t q : selgrid[(static_cast<size_t>(a) * nsel + b) * nsel + c]) {
                if (g_.distance(x, r1[q].x) <= twoL) {
                  defeated = true;
                  break;
                }
              }
            }
        if (!defeated) selected.push_back(i);
        selgrid[selcell_of(x)].push_back(i);
      }

      // deterministic processing order inside the round (supports are disjoint)
      std::sort(selected.begin(), selected.end(), [&](uint32_t a, uint32_t b) {
        const size_t ia = win_.contains(r1[a].x) ? win_.index(r1[a].x) : win_.size();
        const size_t ib = win_.contains(r1[b].x) ? win_.index(r1[b].x) : win_.size();
        return ia != ib ? ia < ib : r1[a].occ < r1[b].occ;
      });
      std::vector<uint8_t> gone(r1.size(), 0);
      for (uint32_t i : selected) {
        res.pairs[i] = grow_and_consume(r1[i].x, round, res.guard_violations);
        gone[i] = 1;
      }
      std::vector<uint32_t> next;
      next.reserve(alive.size() - selected.size());
      for (uint32_t i : alive)
        if (!gone[i]) next.push_back(i);
      alive.swap(next);
      ++round;
    }
    res.rounds = round;
    for (const auto& v : probes) res.g_probe.push_back(win_.contains(v) ? gsurf_[win_.index(v)] : 0.0);
    return res;
  }

  double surface_at(const V& v) const { return win_.contains(v) ? gsurf_[win_.index(v)] : 0.0; }

  // Unconsumed-arrival invariant: nothing left strictly below the surface.
  bool surface_consistent() const {
    for (const auto& c : cells_)
      for (const auto& a : c)
        if (!a.consumed && a.t < gsurf_[a.vidx] - 1e-12) return false;
    return true;
  }

 private:
  struct Arrival {
    double t;
    uint32_t vidx;
    uint32_t occ;
    bool real;
    bool consumed = false;
  };

  double p2L_upper() const {
    // sum_x p_L(x,y)^2 = p_2L(y,y) (Chapman-Kolmogorov), evaluated over the table
    double s = 0.0;
    for (int dx = -rt_; dx <= rt_; ++dx)
      for (int dy = -rt_; dy <= rt_; ++dy)
        for (int dz = -rt_; dz <= rt_; ++dz) {
          const double p = tab_.at(dx, dy, dz);
          s += p * p;
        }
    return s;
  }

  size_t cell_of_idx(size_t widx) const {
    const int a = static_cast<int>(widx / (static_cast<size_t>(side_) * side_));
    const int b = static_cast<int>((widx / side_) % side_);
    const int c = static_cast<int>(widx % side_);
    return (static_cast<size_t>(a / cell_) * ncell_ + b / cell_) * ncell_ + c / cell_;
  }

  void push_arrival(const V& x, double t, bool real, uint32_t occ) {
    const size_t widx = win_.index(x);
    cells_[cell_of_idx(widx)].push_back(Arrival{t, static_cast<uint32_t>(widx), occ, real, false});
  }

  SltPair<V> grow_and_consume(const V& x, uint32_t round, uint64_t& guard) {
    const int cxa = (x.c[0] - win_.center().c[0] + win_.radius());
    const int cxb = (x.c[1] - win_.center().c[1] + win_.radius());
    const int cxc = (x.c[2] - win_.center().c[2] + win_.radius());
    if (cxa < 0 || cxa >= side_ || cxb < 0 || cxb >= side_ || cxc < 0 || cxc >= side_)
      throw std::invalid_argument("slt: R1 point outside field window");

    const int clo_a = std::max(0, (cxa - rt_) / cell_), chi_a = std::min(ncell_ - 1, (cxa + rt_) / cell_);
    const int clo_b = std::max(0, (cxb - rt_) / cell_), chi_b = std::min(ncell_ - 1, (cxb + rt_) / cell_);
    const int clo_c = std::max(0, (cxc - rt_) / cell_), chi_c = std::min(ncell_ - 1, (cxc + rt_) / cell_);

    double eta_best = std::numeric_limits<double>::infinity();
    Arrival* best = nullptr;

    auto dmin_cell = [&](int a, int b, int c) {
      auto axis = [&](int lo, int x0) {
        const int lo0 = lo * cell_, hi0 = std::min(side_ - 1, lo * cell_ + cell_ - 1);
        if (x0 < lo0) return lo0 - x0;
        if (x0 > hi0) return x0 - hi0;
        return 0;
      };
      return axis(a, cxa) + axis(b, cxb) + axis(c, cxc);
    };

    // two passes so the near cells set a tight eta_best before far cells prune
    for (int pass = 0; pass < 2; ++pass) {
      for (int a = clo_a; a <= chi_a; ++a)
        for (int b = clo_b; b <= chi_b; ++b)
          for (int c = clo_c; c <= chi_c; ++c) {
            const int dmin = dmin_cell(a, b, c);
            if (dmin > rt_) continue;
            const bool near = dmin <= rt_ / 2;
            if ((pass == 0) != near) continue;
            const double pub = maxp_ge_[dmin];
            if (pub <= 0.0) continue;
            auto& cl = cells_[(static_cast<size_t>(a) * ncell_ + b) * ncell_ + c];
            const double thi =
                std::isinf(eta_best) ? height_ : cellgmax_[(static_cast<size_t>(a) * ncell_ + b) * ncell_ + c] + eta_best * pub;
            for (auto& arr : cl) {
              if (arr.t > thi) break;
              if (arr.consumed) continue;
              const double gy = gsurf_[arr.vidx];
              if (arr.t <= gy) continue;  // consumed-region arrival (kept consistent below)
              // displacement
              const size_t widx = arr.vidx;
              const int va = static_cast<int>(widx / (static_cast<size_t>(side_) * side_));
              const int vb = static_cast<int>((widx / side_) % side_);
              const int vc = static_cast<int>(widx % side_);
              const double p = tab_.at(va - cxa, vb - cxb, vc - cxc);
              if (p <= 0.0) continue;
              const double eta = (arr.t - gy) / p;
              if (eta < eta_best) {
                eta_best = eta;
                best = &arr;
              }
            }
          }
    }
    if (!best) throw std::runtime_error("slt: no candidate arrival (field exhausted)");

    // certified ceiling guard: could an unmaterialized arrival above H win?
    for (int a = clo_a; a <= chi_a; ++a)
      for (int b = clo_b; b <= chi_b; ++b)
        for (int c = clo_c; c <= chi_c; ++c) {
          const int dmin = dmin_cell(a, b, c);
          if (dmin > rt_) continue;
          const double pub = maxp_ge_[dmin];
          if (pub <= 0.0) continue;
          const double gmax = cellgmax_[(static_cast<size_t>(a) * ncell_ + b) * ncell_ + c];
          if (height_ < gmax + eta_best * pub) ++guard;
        }

    best->consumed = true;
    SltPair<V> out;
    out.t = best->t;
    out.eta = eta_best;
    out.round = round;
    out.real = best->real;
    out.r2_occ = best->occ;
    out.y = win_.vertex(best->vidx);

    // grow the surface: g += eta * p_L(x, .) over the support ball
    for (int da = -rt_; da <= rt_; ++da) {
      const int a = cxa + da;
      if (a < 0 || a >= side_) continue;
      for (int db = -(rt_ - std::abs(da)); db <= rt_ - std::abs(da); ++db) {
        const int b = cxb + db;
        if (b < 0 || b >= side_) continue;
        const int zr = rt_ - std::abs(da) - std::abs(db);
        const int c0 = std::max(0, cxc - zr), c1 = std::min(side_ - 1, cxc + zr);
        const size_t rowbase = (static_cast<size_t>(a) * side_ + b) * side_;
        const size_t tbase = (static_cast<size_t>(da + rt_) * tab_.side + (db + rt_)) * tab_.side;
        double rowmax = 0.0;
        for (int c = c0; c <= c1; ++c) {
          const double add = eta_best * tab_.p[tbase + static_cast<size_t>(c - cxc + rt_)];
          if (add != 0.0) {
            const double nv = (gsurf_[rowbase + c] += add);
            rowmax = std::max(rowmax, nv);
          }
        }
        if (rowmax > 0.0) {
          // update coarse-cell maxima for the touched span
          for (int c = c0; c <= c1; c += cell_) {
            const size_t cc = (static_cast<size_t>(a / cell_) * ncell_ + b / cell_) * ncell_ + (c / cell_);
            cellgmax_[cc] = std::max(cellgmax_[cc], rowmax);
          }
          const size_t cc_end = (static_cast<size_t>(a / cell_) * ncell_ + b / cell_) * ncell_ + (c1 / cell_);
          cellgmax_[cc_end] = std::max(cellgmax_[cc_end], rowmax);
        }
      }
    }
    return out;
  }

  Lattice& g_;
  const LatticeWindow& win_;
  const LatticeBallTable& tab_;
  const Field& f_;
  SltParams par_;
  int rt_ = 0, side_ = 0, cell_ = 1, ncell_ = 1;
  double height_ = 0.0;
  std::vector<double> gsurf_;
  std::vector<double> maxp_ge_;
  std::vector<std::vector<Arrival>> cells_;
  std::vector<double> cellgmax_;
};

// -------------------------------- trees -----------------------------------

// Brute-force engine over a ball window; windows on trees stay small. The
// synthetic field extends lazily per vertex: in the windowed universe the
// surface equilibrium sits near alpha / (window kernel mass), which can far
// exceed alpha when L reaches past the window.
template <class G>
class SltTree {
 public:
  using V = typename G::Vertex;

  SltTree(G& g, const BallWindow<G>& win, const TreeKernel& kern, const Field& f, const SltParams& par)
      : g_(g), win_(win), kern_(kern), f_(f), par_(par) {
    gsurf_.assign(win_.size(), 0.0);
    arrivals_.resize(win_.size());
    ceil_.assign(win_.size(), par_.alpha);
    gapidx_.assign(win_.size(), 0);
    maxp_ = 0.0;
    for (int k = 0; k <= par_.L; ++k) maxp_ = std::max(maxp_, kern_.eval(par_.L, k));
  }

  void build_field(const std::vector<SltPoint<V>>& r2) {
    for (const auto& pt : r2) {
      const double t = par_.alpha * f_.u01(Lane::SltR2Label, g_.key(pt.x), pack_idx3(par_.salt, pt.occ, 1));
      arrivals_[win_.index(pt.x)].push_back(Arrival{t, pt.occ, true, false});
    }
    for (size_t i = 0; i < win_.size(); ++i) {
      std::sort(arrivals_[i].begin(), arrivals_[i].end(),
                [](const Arrival& a, const Arrival& b) { return a.t < b.t; });
      extend(i, par_.alpha + 1.0);
    }
  }

  SltResult<V> match(const std::vector<SltPoint<V>>& r1, const std::vector<V>& probes) {
    SltResult<V> res;
    res.pairs.assign(r1.size(), {});
    const int64_t twoL = 2 * par_.L;
    std::vector<uint32_t> alive(r1.size());
    for (uint32_t i = 0; i < alive.size(); ++i) alive[i] = i;
    std::vector<std::pair<double, uint32_t>> order;
    uint32_t round = 0;
    while (!alive.empty()) {
      if (round >= par_.round_cap) throw std::runtime_error("slt: round cap hit");
      order.clear();
      for (uint32_t i : alive)
        order.emplace_back(
            f_.u01(Lane::SltPriority, g_.key(r1[i].x), pack_idx(pack_idx3(par_.salt, r1[i].occ, 9), round)), i);
      std::sort(order.begin(), order.end());
      std::vector<uint32_t> inserted, selected;
      for (const auto& [u, i] : order) {
        bool defeated = false;
        for (uint32_t q : inserted)
          if (g_.distance(r1[i].x, r1[q].x) <= twoL) {
            defeated = true;
            break;
          }
        if (!defeated) selected.push_back(i);
        inserted.push_back(i);
      }
      std::sort(selected.begin(), selected.end(), [&](uint32_t a, uint32_t b) {
        const size_t ia = win_.index(r1[a].x), ib = win_.index(r1[b].x);
        return ia != ib ? ia < ib : r1[a].occ < r1[b].occ;
      });
      std::vector<uint8_t> gone(r1.size(), 0);
      for (uint32_t i : selected) {
        res.pairs[i] = grow_and_consume(r1[i].x, round, res.guard_violations);
        gone[i] = 1;
      }
      std::vector<uint32_t> next;
      for (uint32_t i : alive)
        if (!gone[i]) next.push_back(i);
      alive.swap(next);
      ++round;
    }
    res.rounds = round;
    for (const auto& v : probes) res.g_probe.push_back(surface_at(v));
    return res;
  }

  double surface_at(const V& v) const { return win_.contains(v) ? gsurf_[win_.index(v)] : 0.0; }

  bool surface_consistent() const {
    for (size_t i = 0; i < arrivals_.size(); ++i)
      for (const auto& a : arrivals_[i])
        if (!a.consumed && a.t < gsurf_[i] - 1e-12) return false;
    return true;
  }

 private:
  struct Arrival {
    double t;
    uint32_t occ;
    bool real;
    bool consumed;
  };

  // Materialize the unit-rate field at window vertex i up to at least `upto`.
  void extend(size_t i, double upto) {
    if (ceil_[i] > upto) return;
    const VertexKey key = g_.key(win_.vertex(i));
    double t = ceil_[i];
    while (t <= upto) {
      t += f_.exp1(Lane::FieldGap, key, pack_idx3(par_.salt, gapidx_[i]++, 2));
      arrivals_[i].push_back(Arrival{t, gapidx_[i] - 1, false, false});
    }
    ceil_[i] = t;  // everything below t is materialized
  }

  SltPair<V> grow_and_consume(const V& x, uint32_t round, uint64_t& guard) {
    (void)guard;
    std::vector<std::pair<size_t, double>> support;  // (window idx, p value)
    for (size_t i = 0; i < win_.size(); ++i) {
      const int64_t dist = g_.distance(x, win_.vertex(i));
      if (dist > par_.L) continue;
      const double p = kern_.eval(par_.L, dist);
      if (p <= 0.0) continue;
      support.emplace_back(i, p);
    }
    if (support.empty()) throw std::runtime_error("slt: empty kernel support in the window");
    double eta_best = 0.0;
    size_t best_v = 0;
    Arrival* best = nullptr;
    for (int iter = 0; iter < 64; ++iter) {
      eta_best = std::numeric_limits<double>::infinity();
      best = nullptr;
      for (const auto& [i, p] : support) {
        const double gy = gsurf_[i];
        for (auto& a : arrivals_[i]) {
          if (a.consumed || a.t <= gy) continue;
          const double eta = (a.t - gy) / p;
          if (eta < eta_best) {
            eta_best = eta;
            best = &a;
            best_v = i;
          }
          break;  // arrivals sorted: the first one above g is minimal at this vertex
        }
      }
      // certify against unmaterialized arrivals, extending lazily if needed
      bool rescan = false;
      for (const auto& [i, p] : support) {
        const double need = std::isinf(eta_best) ? gsurf_[i] + par_.alpha + 1.0
                                                 : gsurf_[i] + eta_best * p;
        if (ceil_[i] <= need) {
          extend(i, need * (1.0 + 1e-12) + 1e-300);
          rescan = true;
        }
      }
      if (!rescan && best) break;
    }
    if (!best) throw std::runtime_error("slt: field extension failed to produce a candidate");
    best->consumed = true;
    SltPair<V> out;
    out.t = best->t;
    out.eta = eta_best;
    out.round = round;
    out.real = best->real;
    out.r2_occ = best->occ;
    out.y = win_.vertex(best_v);
    for (const auto& [i, p] : support) gsurf_[i] += eta_best * p;
    return out;
  }

  G& g_;
  const BallWindow<G>& win_;
  const TreeKernel& kern_;
  const Field& f_;
  SltParams par_;
  double maxp_ = 0.0;
  std::vector<double> gsurf_;
  std::vector<std::vector<Arrival>> arrivals_;
  std::vector<double> ceil_;
  std::vector<uint32_t> gapidx_;
};

}  // namespace rif

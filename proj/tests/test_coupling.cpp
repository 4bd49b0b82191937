#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "rif/coupling.hpp"
#include "rif/stats.hpp"

using namespace rif;

TEST_CASE("bridge length choice") {
  REQUIRE(doubling_bridge_len(128, 1.0 / 128.0) == 64);
  REQUIRE(doubling_bridge_len(16, 1.0 / 16.0) == 11);
}

TEST_CASE("doubling bookkeeping: lengths, stitching, conservation, parity") {
  Lattice g(3);
  const int T = 8;
  const double v = 1.0 / T;
  const int L = doubling_bridge_len(T, v);
  int matched_real = 0, phantom = 0, far = 0;
  for (uint64_t rep = 0; rep < 25; ++rep) {
    Field f(512, rep);
    LatticeWindow win(g, g.origin(), 20);
    CoupleConfig cfg;
    cfg.keep_trace = true;
    LatticeCoupleOps ops(g, win, f, cfg);
    const auto input = sample_fli(g, win, f, v, T);
    DoublingTrace<LatticeVertex> tr;
    const auto out = ops.double_unlabeled(input, v, T, 1, nullptr, &tr);

    REQUIRE(tr.x1.size() + tr.x2.size() == input.size());
    REQUIRE(out.size() == tr.x1.size());
    size_t used = 0;
    for (auto u : tr.x2_used) used += u;
    size_t real_here = 0;
    for (size_t i = 0; i < out.size(); ++i) {
      REQUIRE(out[i].length() == 2 * static_cast<size_t>(T));
      REQUIRE(out[i].start == tr.x1[i].start);
      const auto& w = tr.xpp[i];
      REQUIRE(w.length() == static_cast<size_t>(2 * T + L - 1));
      const auto iT = shear_initial(g, w, T);
      REQUIRE(iT.steps == tr.x1[i].steps);
      const auto mid = shear_segment(g, w, T - 1, L + 1);
      REQUIRE(mid.steps == tr.bridges[i].steps);
      const auto eT = shear_terminal(g, w, T);
      REQUIRE(eT.steps == tr.tails[i].steps);
      REQUIRE(tr.bridges[i].start == tr.x1[i].end);
      REQUIRE(tr.bridges[i].end == tr.tails[i].start);
      if (!tr.far[i]) {
        const auto dd = g.distance(tr.x1[i].end, tr.pairs[i].y);
        REQUIRE((dd & 1) == (L & 1));
        REQUIRE(dd <= L);
        if (tr.pairs[i].real) {
          ++matched_real;
          ++real_here;
        } else {
          ++phantom;
        }
      } else {
        ++far;
      }
    }
    REQUIRE(used == real_here);  // every consumed R2 label continues exactly one pair
    REQUIRE(tr.guard_violations == 0);
  }
  REQUIRE(matched_real > 0);
  REQUIRE(phantom > 0);
  REQUIRE(far == 0);  // no match-radius cap configured
}

TEST_CASE("doubling output law: Poisson(v/2) starts and additivity of images") {
  Lattice g(3);
  const int T = 8;
  const double v = 0.25;
  KSet<LatticeVertex> K{{g.origin()}};
  std::vector<uint32_t> start_counts;
  int bad_additivity = 0;
  for (uint64_t rep = 0; rep < 30; ++rep) {
    Field f(77, rep);
    LatticeWindow win(g, g.origin(), 14);
    LatticeCoupleOps ops(g, win, f);
    const auto input = sample_fli(g, win, f, v, T);
    DoublingTrace<LatticeVertex> tr;
    const auto out = ops.double_unlabeled(input, v, T, 1, &K, &tr);
    std::vector<uint32_t> per(11 * 11 * 11, 0);
    LatticeWindow inner(g, g.origin(), 5);
    for (const auto& w : out)
      if (inner.contains(w.start)) per[inner.index(w.start)]++;
    start_counts.insert(start_counts.end(), per.begin(), per.end());
    const auto ev = bad_event_probe(g, input, tr, K, T);
    bad_additivity += ev.additivity_broken ? 1 : 0;
  }
  REQUIRE(bad_additivity == 0);
  REQUIRE(poisson_gof(start_counts, v / 2.0).pass);
}

TEST_CASE("matched pair law: eta ~ Exp(1), displacement ~ p_L") {
  Lattice g(3);
  const int T = 4;
  const double v = 0.5;
  const int L = doubling_bridge_len(T, v);
  LatticeKernel kern(3, 2 * L);
  // 1%-level tests over independent seed groups; a real bias fails them all
  int group_passes = 0;
  std::vector<double> etas;
  int npairs = 0;
  for (uint64_t group = 0; group < 4; ++group) {
    std::map<std::array<int32_t, 4>, int> disp;
    for (uint64_t rep = 0; rep < 120; ++rep) {
      Field f(13, group * 1000 + rep);
      LatticeWindow win(g, g.origin(), 10);
      LatticeCoupleOps ops(g, win, f);
      const auto input = sample_fli(g, win, f, v, T);
      DoublingTrace<LatticeVertex> tr;
      ops.double_unlabeled(input, v, T, 1, nullptr, &tr);
      LatticeWindow inner(g, g.origin(), 5);
      for (size_t i = 0; i < tr.x1.size(); ++i) {
        if (tr.far[i] || !inner.contains(tr.x1[i].end)) continue;
        etas.push_back(tr.pairs[i].eta);
        std::array<int32_t, 4> d{};
        for (int j = 0; j < 3; ++j) d[j] = tr.pairs[i].y.c[j] - tr.x1[i].end.c[j];
        disp[d]++;
        ++npairs;
      }
    }
    std::vector<double> obs, probs;
    for (const auto& [d, cnt] : disp) {
      obs.push_back(cnt);
      probs.push_back(kern.eval(L, {d[0], d[1], d[2], 0}));
    }
    group_passes += chi2_categories(obs, probs, "pair_disp").pass ? 1 : 0;
  }
  REQUIRE(group_passes >= 3);
  REQUIRE(exp1_ks(etas).pass);
  REQUIRE(npairs > 12000);
}

TEST_CASE("labeled doubling: bands preserved, labels uniform, d_K <= 1/m on band agreement") {
  Lattice g(3);
  const int T = 8;
  const int m = 2;
  KSet<LatticeVertex> K{{g.origin()}};
  std::vector<double> labels;
  for (uint64_t rep = 0; rep < 20; ++rep) {
    Field f(999, rep);
    LatticeWindow win(g, g.origin(), 12);
    LatticeCoupleOps ops(g, win, f);
    const auto z = sample_fli_labeled(g, win, f, T);
    const auto z2 = double_labeled(ops, z, T, m, 100);
    for (const auto& lw : z2) {
      REQUIRE(lw.label >= 0.0);
      REQUIRE(lw.label <= 1.0);
      labels.push_back(lw.label);
    }
    bool bands_agree = true;
    for (int band = 1; band <= m; ++band) {
      const double lo = (band - 1.0) / m, hi = static_cast<double>(band) / m;
      TrajMeasure<LatticeVertex> a, b;
      for (const auto& lw : z)
        if (lw.label >= lo && (lw.label < hi || band == m)) a.push_back(lw.w);
      for (const auto& lw : z2)
        if (lw.label >= lo && (lw.label < hi || band == m)) b.push_back(lw.w);
      if (!localize(g, a, K).same_shapes(localize(g, b, K))) bands_agree = false;
    }
    if (bands_agree) {
      const double d = local_distance(localize(g, z, K), localize(g, z2, K));
      REQUIRE(d <= 1.0 / m + 1e-12);
    }
  }
  REQUIRE(uniform_ks(labels).pass);
}

TEST_CASE("small cascade runs with sane levels") {
  Lattice g(3);
  Field f(31337);
  LatticeWindow win(g, g.origin(), 10);
  LatticeCoupleOps ops(g, win, f);
  KSet<LatticeVertex> K{{g.origin()}};
  LabeledMeasure<LatticeVertex> top;
  const auto levels = cascade(ops, 4, K, &top);
  REQUIRE(levels.size() == 4);
  REQUIRE(levels[0].T == 1);
  REQUIRE(levels[3].T == 8);
  for (const auto& lev : levels) {
    REQUIRE(lev.d_K >= 0.0);
    REQUIRE(lev.d_K <= 1.0);
    REQUIRE(lev.m == std::max(1, static_cast<int>(std::floor(std::pow(lev.T, 0.25)))));
  }
  for (const auto& lw : top) REQUIRE(lw.w.length() == 16);
}

TEST_CASE("bit-exact translation equivariance of the doubling and cascade") {
  const LatticeVertex gamma{{1, -2, 3, 0}};
  const int T = 8;
  const double v = 1.0 / T;

  Lattice ga(3);
  Field f(4242);
  LatticeWindow wa(ga, ga.origin(), 12);
  LatticeCoupleOps opsa(ga, wa, f);
  const auto ina = sample_fli(ga, wa, f, v, T);
  const auto outa = opsa.double_unlabeled(ina, v, T, 1, nullptr, nullptr);

  Lattice gb(3);
  gb.set_stream_shift(gamma);
  LatticeWindow wb(gb, gamma, 12);
  LatticeCoupleOps opsb(gb, wb, f, {});
  const auto inb = sample_fli(gb, wb, f, v, T);
  REQUIRE(measures_identical(inb, translate_measure(ina, gamma)));
  const auto outb = opsb.double_unlabeled(inb, v, T, 1, nullptr, nullptr);
  REQUIRE(measures_identical(outb, translate_measure(outa, gamma)));

  const auto za = sample_fli_labeled(ga, wa, f, T);
  const auto zb = sample_fli_labeled(gb, wb, f, T);
  REQUIRE(labeled_identical(zb, translate_measure(za, gamma)));
  const auto z2a = double_labeled(opsa, za, T, 2, 50);
  const auto z2b = double_labeled(opsb, zb, T, 2, 50);
  REQUIRE(labeled_identical(z2b, translate_measure(z2a, gamma)));

  KSet<LatticeVertex> Ka{{ga.origin()}};
  KSet<LatticeVertex> Kb{{gamma}};
  LabeledMeasure<LatticeVertex> topa, topb;
  const auto leva = cascade(opsa, 3, Ka, &topa);
  const auto levb = cascade(opsb, 3, Kb, &topb);
  REQUIRE(labeled_identical(topb, translate_measure(topa, gamma)));
  for (size_t i = 0; i < leva.size(); ++i) REQUIRE(leva[i].d_K == levb[i].d_K);
}

TEST_CASE("tree doubling smoke test") {
  RegularTree t(3);
  const int T = 8;
  const double v = 1.0 / T;
  Field f(5150);
  auto win = make_window(t, t.origin(), 8);
  CoupleConfig cfg;
  cfg.keep_trace = true;
  TreeCoupleOps ops(t, win, f, cfg);
  const auto input = sample_fli(t, ops.starts(), f, v, T);
  DoublingTrace<TreeSpace::Vertex> tr;
  const auto out = ops.double_unlabeled(input, v, T, 1, nullptr, &tr);
  REQUIRE(out.size() == tr.x1.size());
  for (const auto& w : out) REQUIRE(w.length() == 2 * static_cast<size_t>(T));
  KSet<TreeSpace::Vertex> K{{t.origin()}};
  const auto ev = bad_event_probe(t, input, tr, K, T);
  REQUIRE(!ev.additivity_broken);
}

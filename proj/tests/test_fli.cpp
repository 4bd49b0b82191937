#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "rif/fli.hpp"
#include "rif/stats.hpp"

using namespace rif;

TEST_CASE("sample_fli: empty at v=0, deterministic, poisson starts") {
  Lattice g(3);
  LatticeWindow win(g, g.origin(), 6);
  Field f(2024);
  REQUIRE(sample_fli(g, win, f, 0.0, 4).empty());

  const auto a = sample_fli(g, win, f, 0.5, 4);
  const auto b = sample_fli(g, win, f, 0.5, 4);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].steps == b[i].steps);
  for (const auto& w : a) REQUIRE(w.length() == 4);

  // start counts over vertices x replicas
  std::vector<uint32_t> counts;
  for (uint64_t rep = 0; rep < 12; ++rep) {
    Field fr(77, rep);
    std::vector<uint32_t> per(win.size(), 0);
    for (const auto& w : sample_fli(g, win, fr, 0.5, 4)) per[win.index(w.start)]++;
    counts.insert(counts.end(), per.begin(), per.end());
  }
  REQUIRE(poisson_gof(counts, 0.5).pass);
}

TEST_CASE("sample_fli on z4 and tree windows") {
  Lattice g4(4);
  LatticeWindow w4(g4, g4.origin(), 3);
  Field f(5);
  const auto m = sample_fli(g4, w4, f, 0.3, 3);
  for (const auto& w : m) REQUIRE(w.length() == 3);

  RegularTree t(3);
  auto wt = make_window(t, t.origin(), 6);
  const auto mt = sample_fli(t, wt, f, 0.2, 5);
  for (const auto& w : mt) REQUIRE(w.length() == 5);
}

TEST_CASE("extending the window never changes the local image (exactness)") {
  Lattice g(3);
  KSet<LatticeVertex> K{{g.origin()}};
  const int T = 4;
  Field f(91);
  LatticeWindow w1(g, g.origin(), T - 1);  // radius(K) + T - 1
  LatticeWindow w2(g, g.origin(), T + 3);
  const auto m1 = sample_fli(g, w1, f, 0.5, T);
  const auto m2 = sample_fli(g, w2, f, 0.5, T);
  const auto i1 = localize(g, m1, K);
  const auto i2 = localize(g, m2, K);
  REQUIRE(i1.same_shapes(i2));
  REQUIRE(local_distance(i1, i2) == 0.0);
}

TEST_CASE("hitting bound: P(some trajectory hits K) <= v |K| T") {
  Lattice g(3);
  KSet<LatticeVertex> K{{g.origin(), g.neighbor(g.origin(), 0)}};
  const double v = 0.02;
  const int T = 4;
  LatticeWindow win(g, g.origin(), T);
  int hits = 0;
  const int reps = 4000;
  for (int rep = 0; rep < reps; ++rep) {
    Field f(31, static_cast<uint64_t>(rep));
    const auto m = sample_fli(g, win, f, v, T);
    for (const auto& w : m)
      if (localize_traj(g, w, K)) {
        ++hits;
        break;
      }
  }
  const double freq = static_cast<double>(hits) / reps;
  REQUIRE(freq <= v * K.size() * T);
}

TEST_CASE("labeled sampler: uniform labels, mean 1/T starts, equals unlabeled when stripped") {
  Lattice g(3);
  LatticeWindow win(g, g.origin(), 5);
  std::vector<double> labels;
  double nstarts = 0.0;
  const int reps = 40;
  const int T = 4;
  for (int rep = 0; rep < reps; ++rep) {
    Field f(444, static_cast<uint64_t>(rep));
    const auto m = sample_fli_labeled(g, win, f, T);
    nstarts += static_cast<double>(m.size());
    for (const auto& lw : m) labels.push_back(lw.label);
    // stripping labels reproduces sample_fli(1/T, T) exactly (same streams)
    const auto u = sample_fli(g, win, f, 1.0 / T, T);
    REQUIRE(u.size() == m.size());
    for (size_t i = 0; i < u.size(); ++i) REQUIRE(u[i].steps == m[i].w.steps);
  }
  REQUIRE(uniform_ks(labels).pass);
  const double mean_per_vertex = nstarts / (reps * win.size());
  const double sigma = std::sqrt(1.0 / T / (reps * win.size()));
  REQUIRE(std::abs(mean_per_vertex - 1.0 / T) < 4.0 * sigma);
}

TEST_CASE("ri local sampler: kept counts ~ Poisson(u cap K) on the tree") {
  auto par = ri_defaults_tree();
  par.u = 1.0;
  std::vector<uint32_t> kept;
  double visits = 0.0;
  const int reps = 6000;
  for (int rep = 0; rep < reps; ++rep) {
    RegularTree tt(3);  // fresh arena per replica
    Field f(808, static_cast<uint64_t>(rep));
    KSet<TreeSpace::Vertex> Kt{{tt.origin()}};
    const auto s = sample_ri_local(tt, Kt, f, par);
    kept.push_back(static_cast<uint32_t>(s.kept.size()));
    visits += static_cast<double>(s.visits_K);
  }
  const auto cap = tree_capacity(3, 1, 1e-6);
  REQUIRE(poisson_gof(kept, par.u * cap.value).pass);
  // local-time identity E[L({o})] = u (loose 4-sigma version here)
  const double est = visits / reps;
  REQUIRE(std::abs(est - par.u) < 4.0 * std::sqrt(3.0 / reps));
}

TEST_CASE("ri local sampler: u=0 gives nothing; labels rescale into [0,1]") {
  RegularTree t(3);
  KSet<TreeSpace::Vertex> K{{t.origin()}};
  auto par = ri_defaults_tree();
  par.u = 0.0;
  Field f(3);
  REQUIRE(sample_ri_local(t, K, f, par).kept.empty());
  par.u = 2.0;
  const auto s = sample_ri_local(t, K, f, par);
  for (const auto& [key, e] : s.image.shapes)
    for (double lab : e.labels) {
      REQUIRE(lab >= 0.0);
      REQUIRE(lab <= 1.0);
    }
}

TEST_CASE("tree first-hit sampler matches the windowed fli on small T") {
  const int T = 8;
  TreeHitLaw law(3, T);
  double win_mean = 0.0, hit_mean = 0.0;
  int win_ne = 0, hit_ne = 0;
  const int reps = 4000;
  for (int rep = 0; rep < reps; ++rep) {
    {
      RegularTree t(3);
      auto wt = make_window(t, t.origin(), T - 1);
      Field f(606, static_cast<uint64_t>(rep));
      KSet<TreeSpace::Vertex> K{{t.origin()}};
      const auto img = localize(t, sample_fli_labeled(t, wt, f, T), K);
      win_mean += static_cast<double>(img.total());
      win_ne += img.empty() ? 0 : 1;
    }
    {
      RegularTree t(3);
      Field f(607, static_cast<uint64_t>(rep));
      const auto img = tree_qt_local_image(t, law, f, T);
      hit_mean += static_cast<double>(img.total());
      hit_ne += img.empty() ? 0 : 1;
    }
  }
  win_mean /= reps;
  hit_mean /= reps;
  const double se = std::sqrt(2.0 * law.total_rate() / reps);
  REQUIRE(std::abs(win_mean - hit_mean) < 4.0 * se);
  REQUIRE(std::abs(win_mean - law.total_rate()) < 4.0 * se);
  const double pne = 1.0 - std::exp(-law.total_rate());
  REQUIRE(std::abs(static_cast<double>(win_ne) / reps - pne) < 4.0 * std::sqrt(pne / reps));
  REQUIRE(std::abs(static_cast<double>(hit_ne) / reps - pne) < 4.0 * std::sqrt(pne / reps));
}

TEST_CASE("wusf: out-degree one, acyclic, covered when u is large") {
  Lattice g(3);
  LatticeWindow win(g, g.origin(), 3);
  auto par = ri_defaults_lattice();
  par.u = 6.0;
  par.s_bwd = 300;
  par.s_fwd = 120;
  par.r_stop = 20;
  par.hard_cap = 20000;
  size_t uncovered = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Field f(100 + seed);
    const auto r = wusf_from_ri(g, win, 2, f, par);
    REQUIRE(r.acyclic);
    std::set<std::array<int32_t, 4>> children;
    for (const auto& [c, p] : r.edges) {
      REQUIRE(g.distance(c, p) == 1);
      children.insert(c.c);
    }
    REQUIRE(children.size() == r.edges.size());
    uncovered += r.uncovered.size();
  }
  // coverage of a vertex is 1 - exp(-u cap({v})) ~ 98% at u = 6
  REQUIRE(uncovered < 80);
}

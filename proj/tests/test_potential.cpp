#include <catch2/catch_amalgamated.hpp>

#include "rif/potential.hpp"

using namespace rif;

TEST_CASE("truncated equilibrium measure basics") {
  RegularTree t(3);
  // s = 0 is vacuous
  REQUIRE(tree_eq_measure_trunc(3, 1, 0) == 1.0);
  // monotone nonincreasing in s
  double prev = 1.0;
  for (int s = 1; s <= 256; s *= 2) {
    const double cur = tree_eq_measure_trunc(3, 1, s);
    REQUIRE(cur <= prev + 1e-15);
    REQUIRE(cur >= 0.0);
    prev = cur;
  }
}

TEST_CASE("tree capacity of a single vertex converges to 1/2") {
  const auto r = tree_capacity(3, 1, 1e-6);
  REQUIRE(r.converged);
  REQUIRE_THAT(r.value, Catch::Matchers::WithinAbs(0.5, 5e-3));
  REQUIRE(r.gap < 1e-6);
}

TEST_CASE("tree capacity of an edge pair lies in (0.5, 1) and is subadditive") {
  const auto r1 = tree_capacity(3, 1, 1e-6);
  const auto r2 = tree_capacity(3, 2, 1e-6);
  REQUIRE(r2.converged);
  REQUIRE(r2.value > 0.5);
  REQUIRE(r2.value < 1.0);
  REQUIRE(r2.value <= 2.0 * r1.value + 1e-12);
  // exact limit for the edge pair: 2 * (2/3) * 1/2 = 2/3
  REQUIRE_THAT(r2.value, Catch::Matchers::WithinAbs(2.0 / 3.0, 5e-3));
}

TEST_CASE("dense DP matches the radial chain on the tree") {
  RegularTree t(3);
  KSet<TreeSpace::Vertex> K{{t.origin()}};
  for (int s : {1, 2, 5, 10, 17}) {
    const double dense = eq_measure_trunc(t, K, t.origin(), s);
    const double radial = tree_eq_measure_trunc(3, 1, s);
    REQUIRE_THAT(dense, Catch::Matchers::WithinAbs(radial, 1e-12));
  }
  // edge pair too
  KSet<TreeSpace::Vertex> K2{{t.origin(), t.neighbor(t.origin(), 1)}};
  for (int s : {1, 2, 5, 10}) {
    const double dense = eq_measure_trunc(t, K2, t.origin(), s);
    REQUIRE_THAT(dense, Catch::Matchers::WithinAbs(tree_eq_measure_trunc(3, 2, s), 1e-12));
  }
}

TEST_CASE("equilibrium measure is monotone in K") {
  Lattice g(3);
  KSet<LatticeVertex> K1{{g.origin()}};
  KSet<LatticeVertex> K2{{g.origin(), g.neighbor(g.origin(), 0)}};
  for (int s : {1, 2, 4, 8, 16}) {
    const double e1 = eq_measure_trunc(g, K1, g.origin(), s);
    const double e2 = eq_measure_trunc(g, K2, g.origin(), s);
    REQUIRE(e2 <= e1 + 1e-15);
    REQUIRE(e1 <= 1.0);
    REQUIRE(e2 >= 0.0);
  }
}

TEST_CASE("lattice capacity reports an honest gap") {
  Lattice g(3);
  KSet<LatticeVertex> K{{g.origin()}};
  const auto r = dense_capacity(g, K, 1e-6, 8, 32);
  // Z^3 escape probability ~ 0.6595; at horizon 32 we are within a few percent
  REQUIRE(!r.converged);  // polynomial tail cannot reach 1e-6 here
  REQUIRE(r.value > 0.6);
  REQUIRE(r.value < 0.75);
  REQUIRE(r.gap > 0.0);
  // capacity monotone in K
  KSet<LatticeVertex> K2{{g.origin(), g.neighbor(g.origin(), 0)}};
  const auto r2 = dense_capacity(g, K2, 1e-6, 8, 32);
  REQUIRE(r2.value > r.value);
}

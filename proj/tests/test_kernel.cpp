#include <catch2/catch_amalgamated.hpp>

#include "rif/kernel.hpp"

using namespace rif;

TEST_CASE("kernel basics: p_0 and the two-step returns") {
  Lattice gz(3);
  LatticeKernel kz(3, 8);
  REQUIRE(kz.eval(0, {0, 0, 0, 0}) == 1.0);
  REQUIRE(kz.eval(0, {1, 0, 0, 0}) == 0.0);
  REQUIRE_THAT(kz.eval(2, {0, 0, 0, 0}), Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-15));

  TreeKernel kt(3, 8);
  REQUIRE(kt.eval(0, 0) == 1.0);
  REQUIRE_THAT(kt.eval(2, 0), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
}

TEST_CASE("lattice kernel agrees with the dense DP oracle") {
  Lattice g(3);
  LatticeKernel k(3, 6);
  DenseKernelField<Lattice> dense(g, g.origin(), 6);
  for (int n = 0; n <= 6; ++n) {
    REQUIRE_THAT(dense.slice_sum(n), Catch::Matchers::WithinAbs(1.0, 1e-12));
    for (int dx = -2; dx <= 2; ++dx)
      for (int dy = -2; dy <= 2; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const LatticeVertex v{{dx, dy, dz, 0}};
          REQUIRE_THAT(k.eval(n, g.origin(), v), Catch::Matchers::WithinAbs(dense.at(n, v), 1e-13));
        }
  }
}

TEST_CASE("tree kernel agrees with the dense DP oracle") {
  RegularTree g(3);
  TreeKernel k(3, 7);
  DenseKernelField<RegularTree> dense(g, g.origin(), 7);
  // spot vertices at various distances
  auto o = g.origin();
  auto v1 = g.neighbor(o, 1);
  auto v2 = g.neighbor(v1, 1);
  auto v3 = g.neighbor(v2, 2);
  for (int n = 0; n <= 7; ++n) {
    REQUIRE_THAT(k.eval(n, 0), Catch::Matchers::WithinAbs(dense.at(n, o), 1e-13));
    REQUIRE_THAT(k.eval(n, 1), Catch::Matchers::WithinAbs(dense.at(n, v1), 1e-13));
    REQUIRE_THAT(k.eval(n, 2), Catch::Matchers::WithinAbs(dense.at(n, v2), 1e-13));
    REQUIRE_THAT(k.eval(n, 3), Catch::Matchers::WithinAbs(dense.at(n, v3), 1e-13));
  }
}

TEST_CASE("kernel symmetry p_n(x,y) = p_n(y,x) on transitive families") {
  Lattice g(3);
  LatticeKernel k(3, 5);
  const LatticeVertex x{{1, -2, 0, 0}}, y{{0, 1, 1, 0}};
  for (int n = 0; n <= 5; ++n) REQUIRE(k.eval(n, x, y) == k.eval(n, y, x));
}

TEST_CASE("chapman-kolmogorov: sum_x p_L(y,x)^2 = p_2L(y,y)") {
  LatticeKernel k(3, 12);
  const int L = 6;
  double s = 0.0;
  for (int dx = -L; dx <= L; ++dx)
    for (int dy = -L; dy <= L; ++dy)
      for (int dz = -L; dz <= L; ++dz) {
        if (std::abs(dx) + std::abs(dy) + std::abs(dz) > L) continue;
        const double p = k.eval(L, {dx, dy, dz, 0});
        s += p * p;
      }
  REQUIRE_THAT(s, Catch::Matchers::WithinAbs(k.eval(12, {0, 0, 0, 0}), 1e-12));
}

TEST_CASE("ball table matches pointwise evaluation") {
  LatticeKernel k(3, 10);
  const auto t = make_ball_table(k, 10, 7);
  REQUIRE_THAT(t.at(1, 2, 3), Catch::Matchers::WithinAbs(k.eval(10, {1, 2, 3, 0}), 1e-9));
  REQUIRE(t.at(8, 0, 0) == 0.0);
  REQUIRE(t.max_p > 0.0);
}

TEST_CASE("heat kernel profiles: lattice bounded, tree decaying") {
  const auto zrows = lattice_heat_profile(3, 100);
  REQUIRE(zrows[0].p == 1.0);
  REQUIRE_THAT(zrows[2].p, Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-12));
  // rescaled sequence settles near the local-CLT constant 2*(3/(2*pi))^{3/2}
  const double clt = 2.0 * std::pow(3.0 / (2.0 * M_PI), 1.5);
  REQUIRE(std::abs(zrows[100].rescaled - clt) / clt < 0.1);

  const auto trows = tree_heat_profile(3, 60);
  REQUIRE_THAT(trows[2].p, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
  REQUIRE(trows[40].rescaled < trows[20].rescaled);
  REQUIRE(trows[60].rescaled < trows[40].rescaled);
}

TEST_CASE("lattice heat profile matches dense DP at small n") {
  Lattice g(3);
  DenseKernelField<Lattice> dense(g, g.origin(), 8);
  const auto rows = lattice_heat_profile(3, 8);
  for (int n = 0; n <= 8; ++n)
    REQUIRE_THAT(rows[n].p, Catch::Matchers::WithinAbs(dense.at(n, g.origin()), 1e-12));
}

TEST_CASE("slt support radius covers small L fully") {
  REQUIRE(slt_support_radius(6, 3) == 6);
  REQUIRE(slt_support_radius(16, 3) == 16);
  REQUIRE(slt_support_radius(36, 3) <= 36);
  REQUIRE(slt_support_radius(116, 3) < 116);
  REQUIRE(slt_support_radius(116, 3) >= 34);
}

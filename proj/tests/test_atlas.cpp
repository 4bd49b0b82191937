#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "rif/atlas.hpp"

using namespace rif;

TEST_CASE("lattice chart is a ball isometry anchored at x") {
  Lattice g(3);
  Field f(31);
  const LatticeVertex x{{4, -2, 7, 0}};
  const auto labels = field_labels(g, f);
  const auto ch = greedy_chart(g, labels, x, 2);
  REQUIRE(ch.img[0] == x);
  REQUIRE(chart_is_isomorphism(g, ch));
  // image = x + A(ref) for a single signed permutation A
  bool found = false;
  for (const auto& sp : detail::all_signed_perms(3)) {
    bool all = true;
    for (size_t n = 0; n < ch.ref.size(); ++n)
      if (!(g.translate(sp.apply(ch.ref[n], 3), x) == ch.img[n])) {
        all = false;
        break;
      }
    if (all) found = true;
  }
  REQUIRE(found);
  // rerunning with the same labels is deterministic
  const auto ch2 = greedy_chart(g, labels, x, 2);
  REQUIRE(ch.img == ch2.img);
}

TEST_CASE("lattice chart with increasing labels along the well-order is the identity") {
  Lattice g(3);
  // labels increasing in the chart's own breadth-first well-order
  std::map<std::array<int32_t, 4>, double> rank;
  {
    Field f(1);
    const auto ch0 = greedy_chart(g, field_labels(g, f), g.origin(), 2);
    for (size_t n = 0; n < ch0.ref.size(); ++n) rank[ch0.ref[n].c] = static_cast<double>(n);
  }
  const auto label = [&](const LatticeVertex& v) {
    auto it = rank.find(v.c);
    return it == rank.end() ? 1e9 + std::abs(v.c[0]) + v.c[1] * 0.1 : it->second;
  };
  const auto ch = greedy_chart(g, label, g.origin(), 2);
  for (size_t n = 0; n < ch.ref.size(); ++n) REQUIRE(ch.img[n] == ch.ref[n]);
}

TEST_CASE("lattice chart equivariance is bit-exact under translations") {
  const LatticeVertex gamma{{2, 5, -3, 0}};
  Lattice ga(3);
  Field f(91);
  const auto cha = greedy_chart(ga, field_labels(ga, f), LatticeVertex{{1, 1, 0, 0}}, 2);

  Lattice gb(3);
  gb.set_stream_shift(gamma);
  const auto chb =
      greedy_chart(gb, field_labels(gb, f), lattice_shift(LatticeVertex{{1, 1, 0, 0}}, gamma), 2);
  for (size_t n = 0; n < cha.img.size(); ++n)
    REQUIRE(chb.img[n] == lattice_shift(cha.img[n], gamma));
}

TEST_CASE("tree chart at depth 1 orders the neighbors by label") {
  RegularTree t(3);
  Field f(77);
  const auto x = t.neighbor(t.neighbor(t.origin(), 1), 1);
  const auto labels = field_labels(t, f);
  const auto ch = greedy_chart(t, labels, x, 1);
  REQUIRE(ch.img[0] == x);
  REQUIRE(chart_is_isomorphism(t, ch));
  // the three reference neighbors map to x's neighbors sorted by label
  std::vector<double> got;
  for (size_t n = 1; n < ch.img.size(); ++n) got.push_back(labels(ch.img[n]));
  for (size_t i = 0; i + 1 < got.size(); ++i) REQUIRE(got[i] < got[i + 1]);
}

TEST_CASE("tree chart at depth 3 is an isomorphism") {
  RegularTree t(3);
  Field f(123);
  const auto ch = greedy_chart(t, field_labels(t, f), t.origin(), 3);
  REQUIRE(chart_is_isomorphism(t, ch));
}

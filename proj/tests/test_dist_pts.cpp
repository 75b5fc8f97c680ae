#include <catch2/catch_amalgamated.hpp>

#include "pmask/pts.hpp"
#include "support/util.hpp"

using namespace pmask;

TEST_CASE("dirac distributions") {
  Dist d = Dist::dirac(0);
  CHECK(d.probability(0) == Rat(1));
  CHECK(Dist::dirac(5).support() == std::vector<StateId>{5});
  Rat total = 0;
  for (auto& [s, w] : Dist::dirac(3).entries()) total += w;
  CHECK(total == Rat(1));
}

TEST_CASE("distribution construction") {
  SECTION("merges duplicates and drops zero mass") {
    Dist d = Dist::from_pairs({{2, Rat(1, 4)}, {1, Rat(1, 2)}, {2, Rat(1, 4)}, {3, Rat(0)}});
    CHECK(d.support() == std::vector<StateId>{1, 2});
    CHECK(d.probability(2) == Rat(1, 2));
  }
  SECTION("rejects unnormalized mass") {
    CHECK_THROWS_WITH(Dist::from_pairs({{0, Rat(3, 5)}, {1, Rat(3, 10)}}),
                      Catch::Matchers::ContainsSubstring("9/10"));
    CHECK_THROWS(Dist::from_pairs({}));
  }
  SECTION("rejects negative mass") {
    CHECK_THROWS(Dist::from_pairs({{0, Rat(3, 2)}, {1, Rat(-1, 2)}}));
  }
}

TEST_CASE("transitions_from partitions the transition list") {
  auto mem = testutil::load("memory_nominal.pm", {{"p", Rat(1, 2)}});
  const Pts& pts = mem.pts;

  // concatenating per-state slices in state order reproduces the list
  std::vector<size_t> concat;
  for (StateId s = 0; s < pts.state_count(); ++s)
    for (size_t idx : pts.transition_indices(s)) concat.push_back(idx);
  REQUIRE(concat.size() == pts.transitions().size());
  std::vector<size_t> sorted = concat;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
  for (size_t i = 0; i < concat.size(); ++i) CHECK(pts.transitions()[concat[i]].src == pts.transitions()[i].src);

  for (StateId s = 0; s < pts.state_count(); ++s) CHECK_FALSE(pts.transitions_from(s).empty());
}

TEST_CASE("nominal memory transition fan-out") {
  auto mem = testutil::load("memory_nominal.pm", {{"p", Rat(1, 2)}});
  const Pts& pts = mem.pts;
  // initial state (b=0,m=0): w0, w1, r0, tick
  StateId init = pts.initial();
  REQUIRE(mem.value_of(init, "b") == 0);
  REQUIRE(mem.value_of(init, "m") == 0);
  auto from_init = pts.transitions_from(init);
  REQUIRE(from_init.size() == 4);
  std::vector<std::string> names;
  for (auto& [a, d] : from_init) names.push_back(pts.action_name(a));
  CHECK(names == std::vector<std::string>{"w0", "w1", "r0", "tick"});

  // refreshing state (b=0,m=1): rfsh only
  for (StateId s = 0; s < pts.state_count(); ++s)
    if (mem.value_of(s, "b") == 0 && mem.value_of(s, "m") == 1) {
      auto from = pts.transitions_from(s);
      REQUIRE(from.size() == 1);
      CHECK(pts.action_name(from[0].first) == "rfsh");
    }
}

TEST_CASE("validate reports violations") {
  SECTION("well-formed model is clean") {
    auto mem = testutil::load("memory_nominal.pm", {{"p", Rat(1, 2)}});
    CHECK(mem.pts.validate().empty());
  }
  SECTION("sink state") {
    Pts pts(2, 0);
    ActionId a = pts.intern_action("a");
    pts.add_transition(0, a, Dist::dirac(1));
    auto bad = pts.validate();
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].find("no transition") != std::string::npos);
  }
  SECTION("dangling target") {
    Pts pts(1, 0);
    ActionId a = pts.intern_action("a");
    pts.add_transition(0, a, Dist::dirac(7));
    auto bad = pts.validate();
    REQUIRE_FALSE(bad.empty());
    CHECK(bad[0].find("invalid state") != std::string::npos);
  }
}

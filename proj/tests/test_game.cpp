#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sfl/game.hpp"
#include "sfl/harness.hpp"
#include "sfl/model.hpp"

using namespace sfl;

namespace {

std::vector<int> all_sets(const ProblemInstance& inst) {
  std::vector<int> idx(inst.num_sets());
  for (int i = 0; i < inst.num_sets(); ++i) idx[i] = i;
  return idx;
}

// Feasible primal (distribution mu attaining value on every set) plus feasible
// dual (distribution lambda over sets with max_y lambda-mass of sets covering
// y equal to the same value) pin the game value exactly by weak duality. This
// certificate is independent of how the solver works internally.
void require_certified(const ProblemInstance& inst, const std::vector<int>& coll,
                       const GameSolution& g) {
  Rational mass = 0;
  for (int y = 0; y < inst.num_labels(); ++y) {
    REQUIRE(g.mu.weight(y) >= 0);
    mass += g.mu.weight(y);
  }
  REQUIRE(mass == 1);
  Rational primal_min = 2;
  for (int s : coll) primal_min = std::min(primal_min, g.mu.mass(inst.set_mask(s)));
  REQUIRE(primal_min == g.value);

  REQUIRE(g.lambda.size() == coll.size());
  Rational lmass = 0;
  for (const Rational& l : g.lambda) {
    REQUIRE(l >= 0);
    lmass += l;
  }
  REQUIRE(lmass == 1);
  Rational dual_max = 0;
  for (int y = 0; y < inst.num_labels(); ++y) {
    Rational cover = 0;
    for (size_t i = 0; i < coll.size(); ++i)
      if (inst.set_mask(coll[i]).test(y)) cover += g.lambda[i];
    dual_max = std::max(dual_max, cover);
  }
  REQUIRE(dual_max == g.value);
}

}  // namespace

TEST_CASE("showcase game value is 2/3 with the uniform core measure") {
  ProblemInstance inst = example3_instance();
  GameSolution g = solve_set_game(inst, all_sets(inst));
  REQUIRE(g.value == make_rational(2, 3));
  for (int y : {0, 1, 2}) REQUIRE(g.mu.weight(y) == 0);
  for (int y : {3, 4, 5}) REQUIRE(g.mu.weight(y) == make_rational(1, 3));
  require_certified(inst, all_sets(inst), g);
}

TEST_CASE("two disjoint singletons split the mass") {
  ProblemInstance inst = gen_singleton_instance(2);
  GameSolution g = solve_set_game(inst, all_sets(inst));
  REQUIRE(g.value == make_rational(1, 2));
  REQUIRE(g.mu.weight(0) == make_rational(1, 2));
  REQUIRE(g.mu.weight(1) == make_rational(1, 2));
  require_certified(inst, all_sets(inst), g);
}

TEST_CASE("k disjoint singletons give value 1/k") {
  for (int k : {3, 4, 5}) {
    ProblemInstance inst = gen_singleton_instance(k);
    GameSolution g = solve_set_game(inst, all_sets(inst));
    REQUIRE(g.value == make_rational(1, k));
    require_certified(inst, all_sets(inst), g);
  }
}

TEST_CASE("nested sets concentrate on the smallest") {
  Mask small(3), big(3);
  small.set(0);
  big.set(0);
  big.set(1);
  ProblemInstance inst = ProblemInstance::create(3, {small, big}, {"x"}, {{0}});
  GameSolution g = solve_set_game(inst, all_sets(inst));
  REQUIRE(g.value == 1);
  REQUIRE(g.mu.weight(0) == 1);
  require_certified(inst, all_sets(inst), g);
}

TEST_CASE("single-set collection gets value 1") {
  ProblemInstance inst = example3_instance();
  GameSolution g = solve_set_game(inst, {1});
  REQUIRE(g.value == 1);
  REQUIRE(g.mu.mass(inst.set_mask(1)) == 1);
}

TEST_CASE("cosingleton game value is (M-1)/M") {
  for (int m : {2, 3, 5, 8}) {
    ProblemInstance inst = gen_cosingleton_instance(m);
    GameSolution g = solve_set_game(inst, all_sets(inst));
    REQUIRE(g.value == make_rational(m - 1, m));
    require_certified(inst, all_sets(inst), g);
  }
}

TEST_CASE("random collections always come back certified") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    ProblemInstance inst = random_instance(rng);
    std::vector<int> coll;
    for (int s = 0; s < inst.num_sets(); ++s)
      if (rng() % 2 == 0) coll.push_back(s);
    if (coll.empty()) coll.push_back(0);
    GameSolution g = solve_set_game(inst, coll);
    REQUIRE(g.value > 0);
    REQUIRE(g.value <= 1);
    require_certified(inst, coll, g);
  }
}

TEST_CASE("tie-break among optimal measures is deterministic and reproducible") {
  ProblemInstance inst = example3_instance();
  GameSolution a = solve_set_game(inst, all_sets(inst));
  GameSolution b = solve_set_game(inst, all_sets(inst));
  REQUIRE(a.value == b.value);
  REQUIRE(a.mu == b.mu);
}

TEST_CASE("game_value helper agrees with the full solve") {
  ProblemInstance inst = example3_instance();
  REQUIRE(game_value(inst, all_sets(inst)) == make_rational(2, 3));
}

TEST_CASE("empty collection is rejected") {
  ProblemInstance inst = example3_instance();
  REQUIRE_THROWS_AS(solve_set_game(inst, {}), ConfigError);
}

#include <catch2/catch_amalgamated.hpp>

#include "sfl/model.hpp"

using namespace sfl;

namespace {

Mask mk(int n, std::initializer_list<int> ys) {
  Mask m(n);
  for (int y : ys) m.set(y);
  return m;
}

}  // namespace

TEST_CASE("create canonicalizes set order and dedups") {
  // {2,3,5}=44 and {1,4,5}=50 sort after {0,3,4}=25
  std::vector<Mask> sets = {mk(6, {1, 4, 5}), mk(6, {0, 3, 4}), mk(6, {2, 3, 5}),
                            mk(6, {0, 3, 4})};
  ProblemInstance inst =
      ProblemInstance::create(6, sets, {"x0"}, {{0}, {1}, {2}, {1}});
  REQUIRE(inst.num_sets() == 3);
  REQUIRE(inst.set_mask(0) == mk(6, {0, 3, 4}));
  REQUIRE(inst.set_mask(1) == mk(6, {2, 3, 5}));
  REQUIRE(inst.set_mask(2) == mk(6, {1, 4, 5}));
  // duplicate hypothesis row dropped, first occurrence kept
  REQUIRE(inst.num_hypotheses() == 3);
  REQUIRE(inst.label_of(0, 0) == 0);
  REQUIRE(inst.label_of(1, 0) == 1);
  REQUIRE(inst.label_of(2, 0) == 2);
}

TEST_CASE("create rejects malformed input") {
  REQUIRE_THROWS_AS(ProblemInstance::create(0, {}, {"x"}, {{0}}), ParseError);
  REQUIRE_THROWS_AS(ProblemInstance::create(2, {mk(2, {})}, {"x"}, {{0}}), ParseError);
  REQUIRE_THROWS_AS(ProblemInstance::create(2, {mk(2, {0})}, {"x"}, {{2}}), ParseError);
  REQUIRE_THROWS_AS(ProblemInstance::create(2, {mk(2, {0})}, {"x"}, {{0, 1}}), ParseError);
  REQUIRE_THROWS_AS(ProblemInstance::create(2, {mk(2, {0})}, {}, {{}}), ParseError);
}

TEST_CASE("restrict, outputs and consistent_sets on the showcase system") {
  ProblemInstance inst = example3_instance();
  Mask full = inst.full_version_space();
  REQUIRE(full.count() == 3);
  // set 0 = {0,3,4} keeps only the constant-0 hypothesis
  Mask v0 = inst.restrict(full, 0, 0);
  REQUIRE(v0.to_indices() == std::vector<int>{0});
  REQUIRE(inst.outputs(full, 0) == mk(6, {0, 1, 2}));
  REQUIRE(inst.outputs(v0, 0) == mk(6, {0}));
  // every set contains exactly one constant's output
  REQUIRE(inst.consistent_sets(full, 0) == std::vector<int>{0, 1, 2});
  REQUIRE(inst.consistent_sets(v0, 0) == std::vector<int>{0});
}

TEST_CASE("validate_realizable finds the smallest consistent hypothesis") {
  ProblemInstance inst = example3_instance();
  Stream ok = {{0, 1}, {0, 1}};
  auto h = validate_realizable(inst, ok);
  REQUIRE(h.has_value());
  REQUIRE(*h == 2);  // set index 1 = {2,3,5} contains only output 2
  Stream bad = {{0, 0}, {0, 1}};
  REQUIRE_FALSE(validate_realizable(inst, bad).has_value());
  Stream empty;
  auto any = validate_realizable(inst, empty);
  REQUIRE(any.has_value());
  REQUIRE(*any == 0);
  Stream out_of_range = {{0, 9}};
  REQUIRE_THROWS_AS(validate_realizable(inst, out_of_range), ParseError);
}

TEST_CASE("instance JSON round-trip") {
  for (const ProblemInstance& inst :
       {example3_instance(), gen_hamming_instance(3, 1), gen_interval_instance(4)}) {
    ProblemInstance back = parse_instance(serialize_instance(inst));
    REQUIRE(back == inst);
  }
  REQUIRE_THROWS_AS(parse_instance("not json"), ParseError);
  REQUIRE_THROWS_AS(parse_instance("{\"labels\": 2}"), ParseError);
  REQUIRE_THROWS_AS(parse_instance(R"({"labels":2,"sets":[[0],[5]],"instances":["x"],"hypotheses":[[0]]})"),
                    ParseError);
}

TEST_CASE("stream JSON round-trip") {
  Stream st = {{0, 1}, {0, 2}, {0, 0}};
  Stream back = parse_stream(serialize_stream(st));
  REQUIRE(back.size() == st.size());
  for (size_t i = 0; i < st.size(); ++i) {
    REQUIRE(back[i].instance == st[i].instance);
    REQUIRE(back[i].set == st[i].set);
  }
  REQUIRE_THROWS_AS(parse_stream("{}"), ParseError);
  REQUIRE_THROWS_AS(parse_stream("[[0]]"), ParseError);
}

TEST_CASE("generator shapes") {
  {
    ProblemInstance r = gen_ranking_instance(3);
    REQUIRE(r.num_labels() == 6);  // 3! permutations
    REQUIRE(r.num_sets() >= 6);
  }
  {
    ProblemInstance iv = gen_interval_instance(4);
    REQUIRE(iv.num_labels() == 4);
    REQUIRE(iv.num_sets() == 10);  // all [a,b] in a 4-point grid
  }
  {
    ProblemInstance hm = gen_hamming_instance(3, 1);
    REQUIRE(hm.num_labels() == 8);
    REQUIRE(hm.num_sets() == 8);
    for (int s = 0; s < 8; ++s) REQUIRE(hm.set_mask(s).count() == 4);  // 1 + 3 neighbors
  }
  {
    ProblemInstance sg = gen_singleton_instance(5);
    REQUIRE(sg.num_sets() == 5);
    for (int s = 0; s < 5; ++s) REQUIRE(sg.set_mask(s).count() == 1);
  }
  {
    ProblemInstance cs = gen_cosingleton_instance(5);
    REQUIRE(cs.num_sets() == 5);
    for (int s = 0; s < 5; ++s) REQUIRE(cs.set_mask(s).count() == 4);
  }
  REQUIRE_THROWS_AS(gen_ranking_instance(1), ConfigError);
  REQUIRE_THROWS_AS(gen_hamming_instance(3, 3), ConfigError);
}

TEST_CASE("showcase system identification") {
  REQUIRE(is_example3(example3_instance()));
  REQUIRE_FALSE(is_example3(gen_singleton_instance(6)));
  ProblemInstance copy = parse_instance(serialize_instance(example3_instance()));
  REQUIRE(is_example3(copy));
}

TEST_CASE("ranking loss and rank vectors") {
  auto perms = all_rank_vectors(3);
  REQUIRE(perms.size() == 6);
  // every permutation of {1,2,3} appears exactly once
  std::set<std::vector<int>> uniq(perms.begin(), perms.end());
  REQUIRE(uniq.size() == 6);
}

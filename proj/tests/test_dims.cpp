#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <memory>
#include <random>

#include "sfl/dims.hpp"
#include "sfl/game.hpp"
#include "sfl/harness.hpp"
#include "sfl/model.hpp"

using namespace sfl;

namespace {

std::shared_ptr<DimensionEngine> engine(const ProblemInstance& inst, bool fast = true) {
  return std::make_shared<DimensionEngine>(std::make_shared<const ProblemInstance>(inst),
                                           fast);
}

// Plain depth-first re-implementations of the dimension recursions, no
// memoization, no fast paths. A revealed set that leaves the version space
// unchanged consumes one level of depth (recurse on the same mask with a
// smaller target), so every recursion terminates.

bool naive_sl_reaches(const ProblemInstance& pi, const Mask& v, int t) {
  if (t <= 0) return v.any();
  for (int x = 0; x < pi.num_instances(); ++x) {
    bool all_labels = true;
    for (int y = 0; y < pi.num_labels() && all_labels; ++y) {
      bool found = false;
      for (int s = 0; s < pi.num_sets() && !found; ++s) {
        if (pi.set_mask(s).test(y)) continue;
        Mask child = pi.restrict(v, x, s);
        if (child.none()) continue;
        found = child == v ? naive_sl_reaches(pi, v, t - 1)
                           : naive_sl_reaches(pi, child, t - 1);
      }
      all_labels = found;
    }
    if (all_labels) return true;
  }
  return false;
}

int naive_sldim(const ProblemInstance& pi, const Mask& v) {
  int d = 0;
  while (naive_sl_reaches(pi, v, d + 1)) ++d;
  return d;
}

bool naive_ld_reaches(const ProblemInstance& pi, const Mask& v, int t) {
  if (t <= 0) return v.any();
  for (int x = 0; x < pi.num_instances(); ++x)
    for (int y1 = 0; y1 < pi.num_labels(); ++y1)
      for (int y2 = y1 + 1; y2 < pi.num_labels(); ++y2) {
        Mask a = v & pi.output_mask(x, y1);
        Mask b = v & pi.output_mask(x, y2);
        if (a.none() || b.none()) continue;
        if (naive_ld_reaches(pi, a, t - 1) && naive_ld_reaches(pi, b, t - 1)) return true;
      }
  return false;
}

int naive_ldim(const ProblemInstance& pi, const Mask& v) {
  int d = 0;
  while (naive_ld_reaches(pi, v, d + 1)) ++d;
  return d;
}

bool naive_psl_reaches(const ProblemInstance& pi, const Mask& v, int p, int t) {
  if (t <= 0) return v.any();
  int n = pi.num_sets();
  for (int x = 0; x < pi.num_instances(); ++x) {
    // every subset of 2..p sets, by bitmask
    for (int fam = 1; fam < (1 << n); ++fam) {
      int size = std::popcount(static_cast<unsigned>(fam));
      if (size < 2 || size > p) continue;
      Mask inter = Mask::full(pi.num_labels());
      bool ok = true;
      for (int s = 0; s < n && ok; ++s) {
        if (!(fam & (1 << s))) continue;
        inter = inter & pi.set_mask(s);
        Mask child = pi.restrict(v, x, s);
        if (child.none())
          ok = false;
        else
          ok = child == v ? naive_psl_reaches(pi, v, p, t - 1)
                          : naive_psl_reaches(pi, child, p, t - 1);
      }
      if (ok && inter.none()) return true;
    }
  }
  return false;
}

int naive_psldim(const ProblemInstance& pi, const Mask& v, int p) {
  int d = 0;
  while (naive_psl_reaches(pi, v, p, d + 1)) ++d;
  return d;
}

bool naive_ms_reaches(const ProblemInstance& pi, const Mask& v, const Rational& gamma,
                      int t) {
  if (t <= 0) return v.any();
  for (int x = 0; x < pi.num_instances(); ++x) {
    std::vector<int> coll;
    for (int s = 0; s < pi.num_sets(); ++s) {
      Mask child = pi.restrict(v, x, s);
      if (child.none()) continue;
      bool deep = child == v ? naive_ms_reaches(pi, v, gamma, t - 1)
                             : naive_ms_reaches(pi, child, gamma, t - 1);
      if (deep) coll.push_back(s);
    }
    if (coll.empty()) continue;
    bool unavoidable;
    if (gamma == 0) {
      Mask inter = Mask::full(pi.num_labels());
      for (int s : coll) inter = inter & pi.set_mask(s);
      unavoidable = inter.none();
    } else {
      unavoidable = solve_set_game(pi, coll).value <= 1 - gamma;
    }
    if (unavoidable) return true;
  }
  return false;
}

int naive_msdim(const ProblemInstance& pi, const Mask& v, const Rational& gamma) {
  int d = 0;
  while (naive_ms_reaches(pi, v, gamma, d + 1)) ++d;
  return d;
}

struct NaiveHelly {
  int value = 0;
  bool vacuous = false;
};

NaiveHelly naive_helly(const ProblemInstance& pi) {
  int n = pi.num_sets();
  NaiveHelly out;
  out.vacuous = true;
  for (int fam = 1; fam < (1 << n); ++fam) {
    Mask inter = Mask::full(pi.num_labels());
    for (int s = 0; s < n; ++s)
      if (fam & (1 << s)) inter = inter & pi.set_mask(s);
    if (inter.any()) continue;
    bool minimal = true;
    for (int s = 0; s < n && minimal; ++s) {
      if (!(fam & (1 << s))) continue;
      Mask rest = Mask::full(pi.num_labels());
      for (int r = 0; r < n; ++r)
        if ((fam & (1 << r)) && r != s) rest = rest & pi.set_mask(r);
      minimal = rest.any();
    }
    if (minimal) {
      out.vacuous = false;
      out.value = std::max(out.value, std::popcount(static_cast<unsigned>(fam)));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("showcase dimensions, frozen") {
  auto eng = engine(example3_instance());
  REQUIRE(eng->ldim() == 1);
  REQUIRE(eng->sldim() == 1);
  REQUIRE(eng->psldim(2) == 0);
  REQUIRE(eng->psldim(3) == 1);
  REQUIRE(eng->msdim(make_rational(1, 3)) == 1);
  REQUIRE(eng->msdim(make_rational(2, 5)) == 0);
  HellyResult h = eng->helly_number();
  REQUIRE(h.value == 3);
  REQUIRE_FALSE(h.vacuous);
}

TEST_CASE("showcase minimal empty-intersection family is the whole triple") {
  auto eng = engine(example3_instance());
  auto fams = eng->minimal_families();
  REQUIRE(fams.size() == 1);
  REQUIRE(fams[0] == std::vector<int>{0, 1, 2});
}

TEST_CASE("cosingleton dimension is M-1, fast path agrees with generic walk") {
  for (int m = 2; m <= 7; ++m) {
    ProblemInstance inst = gen_cosingleton_instance(m);
    auto fast = engine(inst, true);
    auto slow = engine(inst, false);
    REQUIRE(fast->sldim() == m - 1);
    REQUIRE(slow->sldim() == m - 1);
    Mask v = inst.full_version_space();
    v.reset(0);
    REQUIRE(fast->sldim(v) == slow->sldim(v));
  }
}

TEST_CASE("singleton feedback collapses every dimension to the classic one") {
  for (int m : {2, 3, 4}) {
    ProblemInstance inst = gen_singleton_instance(m);
    auto eng = engine(inst);
    REQUIRE(eng->sldim() == eng->ldim());
    REQUIRE(eng->msdim(Rational(0)) == eng->ldim());
  }
}

TEST_CASE("engine matches the naive recursions on random tiny instances") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    ProblemInstance inst = random_tiny_instance(rng);
    auto eng = engine(inst);
    Mask v = inst.full_version_space();
    CAPTURE(trial, serialize_instance(inst));
    REQUIRE(eng->sldim() == naive_sldim(inst, v));
    REQUIRE(eng->ldim() == naive_ldim(inst, v));
    REQUIRE(eng->psldim(2) == naive_psldim(inst, v, 2));
    REQUIRE(eng->psldim(3) == naive_psldim(inst, v, 3));
    REQUIRE(eng->msdim(Rational(0)) == naive_msdim(inst, v, Rational(0)));
    REQUIRE(eng->msdim(make_rational(1, 3)) == naive_msdim(inst, v, make_rational(1, 3)));
    REQUIRE(eng->msdim(make_rational(1, 2)) == naive_msdim(inst, v, make_rational(1, 2)));
    HellyResult h = eng->helly_number();
    NaiveHelly nh = naive_helly(inst);
    REQUIRE(h.vacuous == nh.vacuous);
    REQUIRE(h.value == nh.value);
  }
}

TEST_CASE("dimension monotonicity in the version space") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    ProblemInstance inst = random_tiny_instance(rng);
    auto eng = engine(inst);
    Mask v = inst.full_version_space();
    Mask sub = v;
    sub.reset(sub.first());
    if (sub.none()) continue;
    REQUIRE(eng->sldim(sub) <= eng->sldim(v));
    REQUIRE(eng->ldim(sub) <= eng->ldim(v));
    REQUIRE(eng->msdim(sub, make_rational(1, 2)) <= eng->msdim(v, make_rational(1, 2)));
  }
}

TEST_CASE("measure dimension is monotone in gamma") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    ProblemInstance inst = random_tiny_instance(rng);
    auto eng = engine(inst);
    int a = eng->msdim(make_rational(1, 4));
    int b = eng->msdim(make_rational(1, 2));
    int c = eng->msdim(make_rational(3, 4));
    REQUIRE(a >= b);
    REQUIRE(b >= c);
  }
}

TEST_CASE("labelwise witness validates and has the right depth") {
  for (const ProblemInstance& inst :
       {example3_instance(), gen_cosingleton_instance(3), gen_singleton_instance(3)}) {
    auto eng = engine(inst);
    WitnessTree w = eng->sl_witness();
    REQUIRE(w.kind == WitnessTree::Kind::Labelwise);
    REQUIRE(w.depth == eng->sldim());
    REQUIRE_FALSE(validate_witness(inst, w).has_value());
  }
}

TEST_CASE("branching witness validates at arity 3 on the showcase system") {
  ProblemInstance inst = example3_instance();
  auto eng = engine(inst);
  WitnessTree w = eng->psl_witness(3);
  REQUIRE(w.kind == WitnessTree::Kind::Branching);
  REQUIRE(w.p == 3);
  REQUIRE(w.depth == 1);
  REQUIRE_FALSE(validate_witness(inst, w).has_value());
}

TEST_CASE("witness validator rejects corrupted trees") {
  ProblemInstance inst = example3_instance();
  auto eng = engine(inst);
  {
    WitnessTree w = eng->sl_witness();
    w.depth += 1;  // leaves now sit above the stated depth
    REQUIRE(validate_witness(inst, w).has_value());
  }
  {
    WitnessTree w = eng->sl_witness();
    w.root->edge_sets[0] = 0;  // set 0 = {0,3,4} contains label 0
    REQUIRE(validate_witness(inst, w).has_value());
  }
  {
    WitnessTree w = eng->psl_witness(3);
    w.root->edge_sets = {0, 0, 0};  // identical siblings intersect
    REQUIRE(validate_witness(inst, w).has_value());
  }
}

TEST_CASE("relations report on the showcase system") {
  auto eng = engine(example3_instance());
  RelationsReport rep = eng->check_relations(3, make_rational(1, 3));
  REQUIRE(rep.sldim == 1);
  REQUIRE(rep.psldim == 1);
  REQUIRE(rep.msdim == 1);
  REQUIRE(rep.sandwich_ok);
  REQUIRE(rep.ok());
}

TEST_CASE("helly numbers of the named families, frozen") {
  REQUIRE(engine(gen_ranking_instance(3))->helly_number().value == 2);
  REQUIRE(engine(gen_interval_instance(5))->helly_number().value == 2);
  REQUIRE(engine(gen_hamming_instance(3, 1))->helly_number().value == 4);
  HellyResult nested = [] {
    Mask a(3), b(3);
    a.set(0);
    b.set(0);
    b.set(1);
    ProblemInstance inst = ProblemInstance::create(3, {a, b}, {"x"}, {{0}});
    return engine(inst)->helly_number();
  }();
  REQUIRE(nested.vacuous);
  REQUIRE(nested.value == 0);
}

TEST_CASE("ms level sets: self-restriction feeds the level below") {
  ProblemInstance inst = example3_instance();
  auto eng = engine(inst);
  Mask v = inst.full_version_space();
  Rational g = make_rational(1, 3);
  // at level 0 every nonempty child qualifies
  std::vector<int> lvl0 = eng->ms_level_sets(v, 0, g, 0);
  REQUIRE(lvl0 == std::vector<int>{0, 1, 2});
  // every child is a strict shrink to one constant (dimension 0) and no set
  // leaves the space unchanged, so level 1 is empty and the measure learner
  // falls back to the full-menu game measure
  std::vector<int> lvl1 = eng->ms_level_sets(v, 0, g, 1);
  REQUIRE(lvl1.empty());
}

#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "sfl/adversaries.hpp"
#include "sfl/dims.hpp"
#include "sfl/harness.hpp"
#include "sfl/learners.hpp"
#include "sfl/model.hpp"

namespace sfl {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;
};

namespace detail {

inline std::shared_ptr<DimensionEngine> engine_of(ProblemInstance inst) {
  return std::make_shared<DimensionEngine>(
      std::make_shared<const ProblemInstance>(std::move(inst)));
}

inline std::string frac(const Rational& r) { return format_rational(r); }

}  // namespace detail

// 1. On seeded random instances, the branching dimension at p never exceeds
// the measure dimension at 1/p, which never exceeds the labelwise dimension.
inline CheckResult check_structural_sandwich(int instances = 100, uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  std::ostringstream det;
  for (int i = 0; i < instances; ++i) {
    auto eng = detail::engine_of(random_instance(rng));
    for (int p : {2, 3}) {
      RelationsReport rep = eng->check_relations(p, make_rational(1, p));
      if (!rep.sandwich_ok) {
        ++bad;
        if (bad == 1)
          det << "first failure at instance " << i << " p=" << p << ": " << rep.psldim
              << " <= " << rep.msdim << " <= " << rep.sldim << " violated";
      }
    }
  }
  CheckResult r{"structural-sandwich", bad == 0, ""};
  std::ostringstream ok;
  ok << instances << " instances, p in {2,3}, gamma=1/p, " << (instances - bad)
     << "/" << instances << " clean";
  r.details = bad == 0 ? ok.str() : det.str();
  return r;
}

// 2. Same menu: whenever the family's computed Helly number is 2 or 3, the
// three dimensions collapse to one value at gamma = 1/helly.
inline CheckResult check_helly_collapse(int instances = 100, uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  int applicable = 0, bad = 0;
  std::ostringstream det;
  for (int i = 0; i < instances; ++i) {
    auto eng = detail::engine_of(random_instance(rng));
    HellyResult h = eng->helly_number();
    if (h.vacuous || h.value < 2 || h.value > 3) continue;
    ++applicable;
    RelationsReport rep = eng->check_relations(h.value, make_rational(1, h.value));
    if (!(rep.psldim == rep.msdim && rep.msdim == rep.sldim)) {
      ++bad;
      if (bad == 1)
        det << "instance " << i << " helly=" << h.value << ": dims " << rep.psldim << ","
            << rep.msdim << "," << rep.sldim << " differ";
    }
  }
  CheckResult r{"helly-collapse", bad == 0, ""};
  std::ostringstream ok;
  ok << applicable << " applicable instances (helly in {2,3}), all collapsed";
  r.details = bad == 0 ? ok.str() : det.str();
  return r;
}

// 3. Helly numbers of the shipped set families land on their known values.
inline CheckResult check_helly_values() {
  std::ostringstream det;
  bool pass = true;
  auto expect = [&](const char* what, int got, int lo, int hi) {
    if (got < lo || got > hi) {
      pass = false;
      det << what << " expected in [" << lo << "," << hi << "] got " << got << "; ";
    } else {
      det << what << "=" << got << " ";
    }
  };
  for (int k : {3, 4}) {
    auto eng = detail::engine_of(gen_ranking_instance(k));
    std::string nm = "ranking(K=" + std::to_string(k) + ")";
    expect(nm.c_str(), eng->helly_number().value, 2, 2);
  }
  for (int g = 2; g <= 8; ++g) {
    auto eng = detail::engine_of(gen_interval_instance(g));
    std::string nm = "interval(G=" + std::to_string(g) + ")";
    expect(nm.c_str(), eng->helly_number().value, 2, 2);
  }
  {
    auto eng = detail::engine_of(gen_hamming_instance(3, 1));
    expect("hamming(3,1)", eng->helly_number().value, 4, 5);
  }
  {
    auto eng = detail::engine_of(gen_hamming_instance(4, 1));
    expect("hamming(4,1)", eng->helly_number().value, 4, 6);
  }
  return {"helly-values", pass, det.str()};
}

// 4. The deterministic learner's worst case is exactly the labelwise
// dimension: equality against the witness-tree opponent, never exceeded on
// random realizable streams.
inline CheckResult check_deterministic_optimality(uint64_t seed = 2) {
  std::ostringstream det;
  bool pass = true;
  std::mt19937_64 rng(seed);
  struct Setup {
    const char* name;
    ProblemInstance inst;
  };
  std::vector<Setup> menu;
  menu.push_back({"showcase", example3_instance()});
  menu.push_back({"cosingleton(3)", gen_cosingleton_instance(3)});
  for (auto& su : menu) {
    auto inst = std::make_shared<const ProblemInstance>(std::move(su.inst));
    auto eng = std::make_shared<DimensionEngine>(inst);
    int d = eng->sldim();
    {
      SoaLearner soa(eng);
      TreeAdversary adv(inst, eng->sl_witness());
      GameTranscript tr = run_game(*inst, soa, adv, d + 5, RunMode::Exact);
      Rational mistakes = tr.cumulative_expected;
      det << su.name << ": forced " << detail::frac(mistakes) << " (dim " << d << ") ";
      if (mistakes != d) {
        pass = false;
        det << "EXPECTED exactly " << d << "; ";
      }
    }
    int worst = 0;
    for (int i = 0; i < 1000; ++i) {
      Stream stream = random_realizable_stream(*inst, 10, rng);
      SoaLearner soa(eng);
      ScriptedAdversary adv(inst, stream, true);
      GameTranscript tr = run_game(*inst, soa, adv, 10, RunMode::Exact);
      int mistakes = static_cast<int>(to_double(tr.cumulative_expected));
      worst = std::max(worst, mistakes);
      if (tr.cumulative_expected > d) {
        pass = false;
        det << su.name << " random stream " << i << ": " << detail::frac(tr.cumulative_expected)
            << " mistakes exceeds dim " << d << "; ";
        break;
      }
    }
    det << "(random worst " << worst << ") ";
  }
  return {"deterministic-optimality", pass, det.str()};
}

// 5. Exhaustive game value equals min(horizon, labelwise dimension) on a menu
// of tiny instances.
inline CheckResult check_minimax(int instances = 20, uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::ostringstream det;
  bool pass = true;
  int checked = 0;
  for (int i = 0; i < instances; ++i) {
    ProblemInstance inst = random_tiny_instance(rng);
    auto eng = detail::engine_of(inst);
    int d = eng->sldim();
    for (int t = 1; t <= 3; ++t) {
      int v = minimax_oracle(inst, t);
      ++checked;
      if (v != std::min(t, d)) {
        pass = false;
        det << "instance " << i << " T=" << t << ": value " << v << " != min(T," << d
            << "); ";
      }
    }
  }
  if (pass) det << instances << " instances x T in {1,2,3}, " << checked << " identities";
  return {"minimax-oracle", pass, det.str()};
}

// 6. High-mass-miss budget: replaying the measure learner over every
// realizable stream, rounds whose measure misses the feedback set by at least
// eps never outnumber the scale-eps dimension.
inline CheckResult check_miss_budget() {
  std::ostringstream det;
  bool pass = true;
  {
    auto inst = std::make_shared<const ProblemInstance>(example3_instance());
    auto eng = std::make_shared<DimensionEngine>(inst);
    Rational eps = make_rational(1, 3);
    int worst = 0, streams = 0;
    for (int len = 0; len <= 5 && pass; ++len) {
      for (const Stream& st : enumerate_streams(*inst, 0, len, true)) {
        Eq1Report rep = eq1_check(eng, eps, st);
        ++streams;
        worst = std::max(worst, rep.counter);
        if (!rep.pass) {
          pass = false;
          det << "showcase len " << len << ": counter " << rep.counter << " > bound "
              << rep.bound << "; ";
          break;
        }
      }
    }
    det << "showcase: " << streams << " realizable streams, worst counter " << worst
        << " (bound 1) ";
  }
  {
    auto inst = std::make_shared<const ProblemInstance>(gen_singleton_instance(2));
    auto eng = std::make_shared<DimensionEngine>(inst);
    Rational eps = make_rational(1, 4);
    int bound = eng->ldim();
    int worst = 0, streams = 0;
    for (int len = 0; len <= 5 && pass; ++len) {
      for (const Stream& st : enumerate_streams(*inst, 0, len, true)) {
        Eq1Report rep = eq1_check(eng, eps, st);
        ++streams;
        worst = std::max(worst, rep.counter);
        if (rep.counter > bound) {
          pass = false;
          det << "singleton len " << len << ": counter " << rep.counter << " > dim "
              << bound << "; ";
          break;
        }
      }
    }
    det << "| singleton binary: " << streams << " streams, worst " << worst << " (dim "
        << bound << ")";
  }
  return {"miss-budget", pass, det.str()};
}

// 7. The measure learner's exact expected mistake total stays within
// eps*T + dim_eps on exhaustive realizable streams and against the adaptive
// opponent.
inline CheckResult check_measure_learner_bound() {
  auto inst = std::make_shared<const ProblemInstance>(example3_instance());
  auto eng = std::make_shared<DimensionEngine>(inst);
  Rational eps = make_rational(1, 3);
  int dim = eng->msdim(eps);
  std::ostringstream det;
  bool pass = true;
  Rational worst = 0;
  int streams = 0;
  for (int len = 0; len <= 5 && pass; ++len) {
    Rational bound = eps * len + dim;
    for (const Stream& st : enumerate_streams(*inst, 0, len, true)) {
      RsoaLearner rsoa(eng, eps);
      ScriptedAdversary adv(inst, st, true);
      GameTranscript tr = run_game(*inst, rsoa, adv, len, RunMode::Exact);
      ++streams;
      if (tr.cumulative_expected > worst) worst = tr.cumulative_expected;
      if (tr.cumulative_expected > bound) {
        pass = false;
        det << "len " << len << ": loss " << detail::frac(tr.cumulative_expected)
            << " > bound " << detail::frac(bound) << "; ";
      }
    }
  }
  det << streams << " exhaustive streams, worst loss " << detail::frac(worst) << "; ";
  {
    RsoaLearner rsoa(eng, eps);
    MsAdaptiveAdversary adv(eng, eps);
    GameTranscript tr = run_game(*inst, rsoa, adv, 10, RunMode::Exact);
    Rational bound = eps * static_cast<int>(tr.rounds.size()) + dim;
    det << "adaptive run: " << tr.rounds.size() << " rounds, loss "
        << detail::frac(tr.cumulative_expected) << " vs bound " << detail::frac(bound);
    if (tr.cumulative_expected > bound) pass = false;
  }
  return {"measure-learner-bound", pass, det.str()};
}

// 8. Multi-scale potential drop covers the expected loss on every round.
inline CheckResult check_potential(uint64_t seed = 4) {
  std::ostringstream det;
  bool pass = true;
  {
    auto inst = std::make_shared<const ProblemInstance>(example3_instance());
    auto eng = std::make_shared<DimensionEngine>(inst);
    int runs = 0;
    for (int n = 1; n <= 3 && pass; ++n)
      for (int len = 0; len <= 3 && pass; ++len)
        for (const Stream& st : enumerate_streams(*inst, 0, len, true)) {
          PotentialReport rep = potential_check(eng, n, st);
          ++runs;
          if (!rep.pass) {
            pass = false;
            det << "showcase N=" << n << " len=" << len << ": round "
                << rep.first_violation << " drop "
                << detail::frac(rep.drops[rep.first_violation - 1]) << " < loss "
                << detail::frac(rep.losses[rep.first_violation - 1]) << "; ";
          }
        }
    det << "showcase exhaustive: " << runs << " runs ";
  }
  {
    std::mt19937_64 rng(seed);
    int runs = 0;
    for (int i = 0; i < 5 && pass; ++i) {
      auto inst = std::make_shared<const ProblemInstance>(random_instance(rng));
      auto eng = std::make_shared<DimensionEngine>(inst);
      for (int j = 0; j < 200 && pass; ++j) {
        Stream st = random_realizable_stream(*inst, 6, rng);
        int n = 1 + j % 3;
        PotentialReport rep = potential_check(eng, n, st);
        ++runs;
        if (!rep.pass) {
          pass = false;
          det << "random instance " << i << " stream " << j << " N=" << n << ": round "
              << rep.first_violation << " violates; ";
        }
      }
    }
    det << "| random: " << runs << " runs on 5 instances";
  }
  return {"potential-drop", pass, det.str()};
}

// 9. Adaptive opponent at gamma=1/3 extracts expected loss >= gamma * dim
// from the measure learner, exactly.
inline CheckResult check_adaptive_lower_bound() {
  auto inst = std::make_shared<const ProblemInstance>(example3_instance());
  auto eng = std::make_shared<DimensionEngine>(inst);
  Rational gamma = make_rational(1, 3);
  RsoaLearner rsoa(eng, gamma);
  MsAdaptiveAdversary adv(eng, gamma);
  GameTranscript tr = run_game(*inst, rsoa, adv, 10, RunMode::Exact);
  Rational target = gamma * eng->msdim(gamma);
  bool pass = tr.cumulative_expected >= target;
  std::ostringstream det;
  det << "forced expected loss " << detail::frac(tr.cumulative_expected) << " over "
      << tr.rounds.size() << " rounds, target >= " << detail::frac(target);
  return {"adaptive-lower-bound", pass, det.str()};
}

// 10. Expert-aggregation regret: maximize exact expected regret over every
// set sequence of length 6 and compare against dim + eps*T + sqrt(2 dim T ln T).
inline CheckResult check_agnostic_bound() {
  auto inst = std::make_shared<const ProblemInstance>(example3_instance());
  auto eng = std::make_shared<DimensionEngine>(inst);
  Rational eps = make_rational(1, 3);
  const int horizon = 6;
  int dim = eng->msdim(eps);
  double bound =
      dim + to_double(eps) * horizon + std::sqrt(2.0 * dim * horizon * std::log(horizon));
  Rational worst = -1000;
  Stream worst_stream;
  for (const Stream& st : enumerate_streams(*inst, 0, horizon, false)) {
    AgnosticLearner learner(eng, eps, horizon);
    ScriptedAdversary adv(inst, st);
    GameTranscript tr = run_game(*inst, learner, adv, horizon, RunMode::Exact);
    if (tr.regret > worst) {
      worst = tr.regret;
      worst_stream = st;
    }
  }
  bool pass = to_double(worst) <= bound;
  std::ostringstream det;
  det << "max regret over 3^6 sequences = " << detail::frac(worst) << " (~"
      << to_double(worst) << "), bound " << bound;
  return {"agnostic-regret-bound", pass, det.str()};
}

// 11. Sign-flip opponent on the two-label singleton system: mean regret over
// 10^4 exact trials clears sqrt(T/8) minus three standard errors for every
// learner in the menu.
inline CheckResult check_khinchine(int trials = 10000, uint64_t seed = 5) {
  auto inst = std::make_shared<const ProblemInstance>(gen_singleton_instance(2));
  auto eng = std::make_shared<DimensionEngine>(inst);
  const int k = 25;
  WitnessTree base = eng->psl_witness(2);
  if (base.depth < 1) return {"sign-flip-lower-bound", false, "no depth-1 witness"};
  const int horizon = k * base.depth;
  double target = std::sqrt(horizon / 8.0);
  std::ostringstream det;
  bool pass = true;
  for (const std::string& kind : {"soa", "rsoa", "uniform"}) {
    TrialSummary sum = monte_carlo(trials, seed, [&](uint64_t s) {
      LearnerOptions opt;
      opt.reset_on_empty = true;
      auto learner = make_learner(kind, eng, opt);
      KhinchineAdversary adv(inst, eng->psl_witness(2), k, s);
      GameTranscript tr = run_game(*inst, *learner, adv, horizon, RunMode::Exact);
      return tr.regret;
    });
    double mean = to_double(sum.mean);
    double floor = target - 3 * sum.se();
    det << kind << ": mean " << mean << " (se " << sum.se() << ", floor " << floor
        << ") ";
    if (mean < floor) {
      pass = false;
      det << "BELOW; ";
    }
  }
  return {"sign-flip-lower-bound", pass, det.str()};
}

// 12. The hand-rolled showcase strategy keeps exact expected regret within
// 1/3 on every length-5 sequence.
inline CheckResult check_showcase_regret() {
  auto inst = std::make_shared<const ProblemInstance>(example3_instance());
  Rational worst = -1000;
  for (const Stream& st : enumerate_streams(*inst, 0, 5, false)) {
    Example3Learner learner(inst);
    ScriptedAdversary adv(inst, st);
    GameTranscript tr = run_game(*inst, learner, adv, 5, RunMode::Exact);
    if (tr.regret > worst) worst = tr.regret;
  }
  bool pass = worst <= make_rational(1, 3);
  std::ostringstream det;
  det << "max regret over 3^5 sequences = " << detail::frac(worst) << ", bound 1/3";
  return {"showcase-regret", pass, det.str()};
}

// 13. Deterministic-vs-randomized separation on the 100-label cosingleton
// system: the deterministic learner is forced every round, the uniform
// learner loses exactly 1/M per round.
inline CheckResult check_separation() {
  auto inst = std::make_shared<const ProblemInstance>(gen_cosingleton_instance(100));
  auto eng = std::make_shared<DimensionEngine>(inst);
  const int horizon = 20;
  std::ostringstream det;
  bool pass = true;
  {
    SoaLearner soa(eng);
    SeparationAdversary adv(inst);
    GameTranscript tr = run_game(*inst, soa, adv, horizon, RunMode::Exact);
    det << "deterministic losses " << detail::frac(tr.cumulative_expected) << "/" << horizon
        << " ";
    if (tr.cumulative_expected != horizon) pass = false;
  }
  {
    UniformLearner uni(inst->num_labels());
    SeparationAdversary adv(inst);
    GameTranscript tr = run_game(*inst, uni, adv, horizon, RunMode::Exact);
    Rational want = make_rational(horizon, inst->num_labels());
    det << "| uniform expected " << detail::frac(tr.cumulative_expected) << " (want "
        << detail::frac(want) << ")";
    if (tr.cumulative_expected != want) pass = false;
  }
  return {"separation-demo", pass, det.str()};
}

// 14. On singleton feedback the three dimensions coincide with the classic
// multiclass online dimension.
inline CheckResult check_singleton_reduction(int instances = 20, uint64_t seed = 6) {
  std::mt19937_64 rng(seed);
  std::ostringstream det;
  bool pass = true;
  for (int i = 0; i < instances; ++i) {
    int m = 2 + static_cast<int>(rng() % 4);
    int nx = 1 + static_cast<int>(rng() % 3);
    int nh = 2 + static_cast<int>(rng() % 7);
    std::vector<Mask> sets;
    for (int y = 0; y < m; ++y) {
      Mask a(m);
      a.set(y);
      sets.push_back(a);
    }
    std::vector<std::vector<int>> rows;
    for (int h = 0; h < nh; ++h) {
      std::vector<int> row;
      for (int x = 0; x < nx; ++x) row.push_back(static_cast<int>(rng() % m));
      rows.push_back(row);
    }
    std::vector<std::string> names;
    for (int x = 0; x < nx; ++x) names.push_back("x" + std::to_string(x));
    ProblemInstance inst = ProblemInstance::create(m, sets, names, rows);
    if (inst.num_hypotheses() < 2) {
      --i;
      continue;
    }
    auto eng = detail::engine_of(inst);
    int sl = eng->sldim(), ld = eng->ldim(), ms0 = eng->msdim(Rational(0));
    if (!(sl == ld && ms0 == ld)) {
      pass = false;
      det << "instance " << i << ": sl=" << sl << " ld=" << ld << " ms0=" << ms0 << "; ";
    }
  }
  if (pass) det << instances << " singleton systems, all three dimensions equal";
  return {"singleton-reduction", pass, det.str()};
}

// 15. Two far-apart constants over radius-1 balls admit a validated
// two-branch witness of depth >= 1 whose sibling sets are disjoint.
inline CheckResult check_ball_witness() {
  ProblemInstance base = gen_hamming_instance(3, 1);
  std::vector<Mask> sets;
  for (int s = 0; s < base.num_sets(); ++s) sets.push_back(base.set_mask(s));
  std::vector<std::vector<int>> rows = {{0}, {7}};  // constants 000 and 111
  ProblemInstance inst =
      ProblemInstance::create(base.num_labels(), sets, {"x0"}, rows);
  auto eng = detail::engine_of(inst);
  int d = eng->psldim(2);
  std::ostringstream det;
  if (d < 1) return {"ball-witness", false, "branching dimension " + std::to_string(d)};
  WitnessTree w = eng->psl_witness(2);
  auto err = validate_witness(eng->instance(), w);
  if (err) return {"ball-witness", false, *err};
  const WitnessNode* root = w.root.get();
  bool disjoint = !eng->instance()
                       .set_mask(root->edge_sets[0])
                       .intersects(eng->instance().set_mask(root->edge_sets[1]));
  det << "branching dim " << d << ", witness depth " << w.depth << ", sibling sets "
      << root->edge_sets[0] << "/" << root->edge_sets[1]
      << (disjoint ? " disjoint" : " OVERLAP");
  return {"ball-witness", d >= 1 && disjoint, det.str()};
}

inline std::vector<CheckResult> run_all_checks() {
  return {check_structural_sandwich(),
          check_helly_collapse(),
          check_helly_values(),
          check_deterministic_optimality(),
          check_minimax(),
          check_miss_budget(),
          check_measure_learner_bound(),
          check_potential(),
          check_adaptive_lower_bound(),
          check_agnostic_bound(),
          check_khinchine(),
          check_showcase_regret(),
          check_separation(),
          check_singleton_reduction(),
          check_ball_witness()};
}

// CLI suite groupings; names are part of the command-line contract.
inline std::vector<std::string> suite_names() {
  return {"structural", "helly",     "minimax",  "eq1",       "potential",
          "khinchine",  "example3",  "separation"};
}

inline std::vector<CheckResult> run_suite(const std::string& suite) {
  if (suite == "structural")
    return {check_structural_sandwich(), check_helly_collapse(), check_singleton_reduction()};
  if (suite == "helly") return {check_helly_values(), check_ball_witness()};
  if (suite == "minimax") return {check_deterministic_optimality(), check_minimax()};
  if (suite == "eq1") return {check_miss_budget(), check_measure_learner_bound()};
  if (suite == "potential") return {check_potential()};
  if (suite == "khinchine") return {check_khinchine()};
  if (suite == "example3")
    return {check_adaptive_lower_bound(), check_agnostic_bound(), check_showcase_regret()};
  if (suite == "separation") return {check_separation()};
  if (suite == "all") return run_all_checks();
  throw ParseError("unknown verify suite: " + suite);
}

}  // namespace sfl

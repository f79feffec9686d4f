#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sfl/adversaries.hpp"
#include "sfl/dims.hpp"
#include "sfl/errors.hpp"
#include "sfl/learners.hpp"
#include "sfl/model.hpp"
#include "sfl/rational.hpp"

namespace sfl {

enum class RunMode { Exact, Sampled };

struct RoundRecord {
  int round = 0;  // 1-based
  int instance = 0;
  Prediction prediction;
  int set = 0;
  std::optional<int> sampled_label;
  std::optional<int> sampled_loss;
  Rational expected_loss;
};

struct GameTranscript {
  std::vector<RoundRecord> rounds;
  bool sampled_mode = false;
  Rational cumulative_expected;
  int cumulative_sampled = 0;
  int comparator_loss = 0;
  int comparator_hypothesis = -1;
  Rational regret;  // sampled or expected cumulative minus comparator, per mode
};

// One full game. The adversary always sees the emitted prediction, never a
// sampled draw; sampling happens afterwards, only in sampled mode and only
// for measure predictions. Realizable-kind adversaries are audited round by
// round: emptying the global version space is a bug, not a game outcome.
inline GameTranscript run_game(const ProblemInstance& inst, Learner& learner,
                               Adversary& adversary, int max_rounds, RunMode mode,
                               uint64_t seed = 0) {
  if (max_rounds < 0) throw ConfigError("run_game: negative horizon");
  std::mt19937_64 rng(seed);
  GameTranscript tr;
  tr.sampled_mode = mode == RunMode::Sampled;
  Mask audit = inst.full_version_space();
  for (int t = 0; t < max_rounds; ++t) {
    std::optional<int> xo = adversary.next_instance();
    if (!xo) break;
    int x = *xo;
    if (x < 0 || x >= inst.num_instances())
      throw ConfigError("run_game: adversary emitted an instance out of range");
    Prediction pred = learner.predict(x);
    int s = adversary.reveal(pred);
    if (s < 0 || s >= inst.num_sets())
      throw ConfigError("run_game: adversary emitted a set out of range");
    RoundRecord rec;
    rec.round = t + 1;
    rec.instance = x;
    rec.set = s;
    rec.expected_loss = pred.miss_mass(inst.set_mask(s));
    if (tr.sampled_mode) {
      int drawn = pred.label ? *pred.label : pred.mixture->sample(rng);
      rec.sampled_label = drawn;
      rec.sampled_loss = inst.set_mask(s).test(drawn) ? 0 : 1;
      tr.cumulative_sampled += *rec.sampled_loss;
    }
    tr.cumulative_expected += rec.expected_loss;
    rec.prediction = pred;
    if (adversary.realizable()) {
      audit = inst.restrict(audit, x, s);
      if (audit.none())
        throw ConfigError("run_game: " + adversary.name() +
                          " adversary broke realizability");
    }
    learner.update(x, s);
    tr.rounds.push_back(std::move(rec));
  }
  int best = -1;
  int best_loss = 0;
  for (int h = 0; h < inst.num_hypotheses(); ++h) {
    int loss = 0;
    for (const RoundRecord& r : tr.rounds)
      if (!inst.set_mask(r.set).test(inst.label_of(h, r.instance))) ++loss;
    if (best < 0 || loss < best_loss) {
      best = h;
      best_loss = loss;
    }
  }
  tr.comparator_hypothesis = best;
  tr.comparator_loss = best < 0 ? 0 : best_loss;
  tr.regret = tr.sampled_mode ? Rational(tr.cumulative_sampled - tr.comparator_loss)
                              : tr.cumulative_expected - tr.comparator_loss;
  return tr;
}

namespace detail {

inline uint64_t mix_seed(uint64_t base, uint64_t index) {
  uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

struct TrialSummary {
  int trials = 0;
  Rational mean;
  Rational variance;  // sample variance, zero when trials < 2
  uint64_t seed_base = 0;
  double se() const {
    return trials > 0 ? std::sqrt(to_double(variance) / trials) : 0.0;
  }
};

// fn: uint64_t seed -> Rational statistic (one independent game per call)
template <typename Fn>
TrialSummary monte_carlo(int trials, uint64_t seed_base, Fn&& fn) {
  if (trials < 1) throw ConfigError("monte_carlo: trials must be at least 1");
  TrialSummary sum;
  sum.trials = trials;
  sum.seed_base = seed_base;
  std::vector<Rational> vals;
  vals.reserve(trials);
  Rational total = 0;
  for (int i = 0; i < trials; ++i) {
    vals.push_back(fn(detail::mix_seed(seed_base, i)));
    total += vals.back();
  }
  sum.mean = total / trials;
  if (trials > 1) {
    Rational ss = 0;
    for (const Rational& v : vals) ss += (v - sum.mean) * (v - sum.mean);
    sum.variance = ss / (trials - 1);
  }
  return sum;
}

struct Eq1Report {
  int counter = 0;
  int bound = 0;
  bool pass = false;
};

// Replays the level-search learner on a realizable stream and counts rounds
// whose measure puts mass >= eps outside the feedback set; the count may
// never exceed the scale-eps dimension of the class.
inline Eq1Report eq1_check(std::shared_ptr<DimensionEngine> eng, const Rational& eps,
                           const Stream& stream) {
  const ProblemInstance& pi = eng->instance();
  if (!validate_realizable(pi, stream))
    throw RealizabilityError("eq1_check: stream not realizable");
  Eq1Report rep;
  Mask v = pi.full_version_space();
  rep.bound = eng->msdim(v, eps);
  for (const StreamRound& r : stream) {
    RationalDistribution mu = rsoa_measure(*eng, v, r.instance, eps);
    if (mu.complement_mass(pi.set_mask(r.set)) >= eps) ++rep.counter;
    v = pi.restrict(v, r.instance, r.set);
  }
  rep.pass = rep.counter <= rep.bound;
  return rep;
}

struct PotentialReport {
  bool pass = true;
  int first_violation = -1;  // 1-based round, -1 when clean
  std::vector<Rational> drops;
  std::vector<Rational> losses;
  Rational cumulative_loss;
  Rational cumulative_bound;
};

// Traces the multi-scale learner's potential
//   Phi_t = (T+1-t) g_N + 16 sum_i g_i dim_{g_i}(V_{t-1})
// and checks the per-round drop covers the expected loss. Summing the drops
// telescopes to the cumulative bound, so the check subsumes it.
inline PotentialReport potential_check(std::shared_ptr<DimensionEngine> eng, int num_scales,
                                       const Stream& stream) {
  const ProblemInstance& pi = eng->instance();
  if (!validate_realizable(pi, stream))
    throw RealizabilityError("potential_check: stream not realizable");
  MsolLearner msol(eng, num_scales);
  const std::vector<Rational>& gammas = msol.scales();
  int horizon = static_cast<int>(stream.size());
  auto phi = [&](int t, const Mask& v) {
    Rational p = Rational(horizon + 1 - t) * gammas.back();
    for (const Rational& g : gammas) p += 16 * g * eng->msdim(v, g);
    return p;
  };
  PotentialReport rep;
  for (int t = 1; t <= horizon; ++t) {
    const StreamRound& r = stream[t - 1];
    Mask before = msol.version_space();
    Prediction pred = msol.predict(r.instance);
    Rational loss = pred.miss_mass(pi.set_mask(r.set));
    msol.update(r.instance, r.set);
    Rational drop = phi(t, before) - phi(t + 1, msol.version_space());
    rep.drops.push_back(drop);
    rep.losses.push_back(loss);
    rep.cumulative_loss += loss;
    if (drop < loss && rep.pass) {
      rep.pass = false;
      rep.first_violation = t;
    }
  }
  rep.cumulative_bound = Rational(horizon) * gammas.back();
  for (const Rational& g : gammas)
    rep.cumulative_bound += 16 * g * eng->msdim(pi.full_version_space(), g);
  return rep;
}

// Exact deterministic game value by backward induction: the opponent shows an
// instance, the learner answers with a label, the opponent reveals any
// consistent set; repeat for the remaining rounds. Desk-scale guard only.
inline int minimax_oracle(const ProblemInstance& inst, int horizon) {
  if (inst.num_labels() > 6 || inst.num_sets() > 5 || inst.num_instances() > 2 ||
      inst.num_hypotheses() > 5 || horizon > 4)
    throw GuardError("minimax_oracle: instance or horizon beyond the exhaustive guard");
  if (horizon < 0) throw ConfigError("minimax_oracle: negative horizon");
  std::map<std::pair<Mask, int>, int> memo;
  auto value = [&](auto&& self, const Mask& v, int t) -> int {
    if (t == 0) return 0;
    auto key = std::make_pair(v, t);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int best_x = 0;
    for (int x = 0; x < inst.num_instances(); ++x) {
      std::vector<int> consistent = inst.consistent_sets(v, x);
      if (consistent.empty()) continue;  // any reveal here would break realizability
      int best_y = -1;
      for (int y = 0; y < inst.num_labels(); ++y) {
        int worst = 0;
        for (int s : consistent) {
          int m = (inst.set_mask(s).test(y) ? 0 : 1) +
                  self(self, inst.restrict(v, x, s), t - 1);
          worst = std::max(worst, m);
        }
        if (best_y < 0 || worst < best_y) best_y = worst;
      }
      best_x = std::max(best_x, best_y);
    }
    memo.emplace(key, best_x);
    return best_x;
  };
  return value(value, inst.full_version_space(), horizon);
}

// Random instance menus for the verification suites; `rng() % n` keeps draws
// reproducible across standard library implementations.
inline ProblemInstance random_instance(std::mt19937_64& rng) {
  while (true) {
    int m = 2 + static_cast<int>(rng() % 4);       // labels in [2,5]
    int nsets = 2 + static_cast<int>(rng() % 5);   // sets in [2,6]
    int nx = 1 + static_cast<int>(rng() % 3);      // instances in [1,3]
    int nh = 2 + static_cast<int>(rng() % 7);      // hypotheses in [2,8]
    std::vector<Mask> sets;
    for (int s = 0; s < nsets; ++s) {
      uint64_t bits = 0;
      while (bits == 0) bits = rng() & ((1ull << m) - 1);
      Mask a(m);
      for (int y = 0; y < m; ++y)
        if (bits & (1ull << y)) a.set(y);
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
    if (inst.num_sets() >= 2 && inst.num_hypotheses() >= 2) return inst;
  }
}

inline ProblemInstance random_instance_with_disjoint_pair(std::mt19937_64& rng) {
  while (true) {
    ProblemInstance inst = random_instance(rng);
    for (int a = 0; a < inst.num_sets(); ++a)
      for (int b = a + 1; b < inst.num_sets(); ++b)
        if (!inst.set_mask(a).intersects(inst.set_mask(b))) return inst;
  }
}

// small enough for the exhaustive minimax guard
inline ProblemInstance random_tiny_instance(std::mt19937_64& rng) {
  while (true) {
    int m = 2 + static_cast<int>(rng() % 3);      // labels in [2,4]
    int nsets = 2 + static_cast<int>(rng() % 3);  // sets in [2,4]
    int nx = 1 + static_cast<int>(rng() % 2);     // instances in [1,2]
    int nh = 2 + static_cast<int>(rng() % 3);     // hypotheses in [2,4]
    std::vector<Mask> sets;
    for (int s = 0; s < nsets; ++s) {
      uint64_t bits = 0;
      while (bits == 0) bits = rng() & ((1ull << m) - 1);
      Mask a(m);
      for (int y = 0; y < m; ++y)
        if (bits & (1ull << y)) a.set(y);
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
    if (inst.num_sets() >= 2 && inst.num_hypotheses() >= 2) return inst;
  }
}

// All set sequences of the given length over one fixed instance index,
// optionally filtered to realizable ones. Exponential; desk scale only.
inline std::vector<Stream> enumerate_streams(const ProblemInstance& inst, int instance_index,
                                             int length, bool only_realizable) {
  if (length < 0) throw ConfigError("enumerate_streams: negative length");
  double total = std::pow(static_cast<double>(inst.num_sets()), length);
  if (total > 2e6) throw GuardError("enumerate_streams: too many sequences");
  std::vector<Stream> out;
  Stream cur(length, StreamRound{instance_index, 0});
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == length) {
      if (!only_realizable || validate_realizable(inst, cur)) out.push_back(cur);
      return;
    }
    for (int s = 0; s < inst.num_sets(); ++s) {
      cur[pos].set = s;
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return out;
}

// A realizable stream drawn round by round: pick a hypothesis, then random
// sets containing its outputs (restricted to keep the whole prefix
// consistent with it).
inline Stream random_realizable_stream(const ProblemInstance& inst, int length,
                                       std::mt19937_64& rng) {
  int h = static_cast<int>(rng() % inst.num_hypotheses());
  // instances where at least one set contains h's output, so every draw lands
  std::vector<std::pair<int, std::vector<int>>> feedable;
  for (int x = 0; x < inst.num_instances(); ++x) {
    std::vector<int> ok;
    for (int s = 0; s < inst.num_sets(); ++s)
      if (inst.set_mask(s).test(inst.label_of(h, x))) ok.push_back(s);
    if (!ok.empty()) feedable.emplace_back(x, std::move(ok));
  }
  Stream out;
  if (feedable.empty()) return out;
  for (int t = 0; t < length; ++t) {
    const auto& [x, ok] = feedable[static_cast<size_t>(rng() % feedable.size())];
    out.push_back({x, ok[static_cast<size_t>(rng() % ok.size())]});
  }
  return out;
}

// CSV schema:
// round,instance,prediction,set,sampled_loss,expected_loss_num,expected_loss_den,
// cum_expected,comparator,regret_num,regret_den
// The prediction cell holds the emitted label, else the sampled label, else
// "-". cum_expected is a display double; every decision-grade quantity
// travels as exact numerator/denominator pairs. comparator and regret are
// running prefix values, so the last row matches the transcript summary.
inline void emit_csv(const GameTranscript& tr, const ProblemInstance& inst,
                     std::ostream& os) {
  os << "round,instance,prediction,set,sampled_loss,expected_loss_num,"
        "expected_loss_den,cum_expected,comparator,regret_num,regret_den\n";
  Rational cum = 0;
  int cum_sampled = 0;
  std::vector<int> hloss(inst.num_hypotheses(), 0);
  for (const RoundRecord& r : tr.rounds) {
    cum += r.expected_loss;
    if (r.sampled_loss) cum_sampled += *r.sampled_loss;
    for (int h = 0; h < inst.num_hypotheses(); ++h)
      if (!inst.set_mask(r.set).test(inst.label_of(h, r.instance))) ++hloss[h];
    int comp = hloss.empty() ? 0 : *std::min_element(hloss.begin(), hloss.end());
    Rational regret =
        tr.sampled_mode ? Rational(cum_sampled - comp) : cum - comp;
    os << r.round << ',' << r.instance << ',';
    if (r.prediction.label)
      os << *r.prediction.label;
    else if (r.sampled_label)
      os << *r.sampled_label;
    else
      os << '-';
    os << ',' << r.set << ',';
    if (r.sampled_loss)
      os << *r.sampled_loss;
    else
      os << '-';
    os << ',' << numerator(r.expected_loss) << ',' << denominator(r.expected_loss) << ','
       << std::setprecision(12) << to_double(cum) << ',' << comp << ','
       << numerator(regret) << ',' << denominator(regret) << '\n';
  }
}

inline std::string csv_string(const GameTranscript& tr, const ProblemInstance& inst) {
  std::ostringstream os;
  emit_csv(tr, inst, os);
  return os.str();
}

}  // namespace sfl

#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sfl/dims.hpp"
#include "sfl/distribution.hpp"
#include "sfl/errors.hpp"
#include "sfl/mask.hpp"
#include "sfl/model.hpp"
#include "sfl/rational.hpp"

namespace sfl {

// A prediction is a single label or an exact distribution over labels; the
// harness samples from distributions when a drawn label is needed.
struct Prediction {
  std::optional<int> label;
  std::optional<RationalDistribution> mixture;

  bool is_deterministic() const { return label.has_value(); }

  static Prediction of_label(int y) {
    Prediction p;
    p.label = y;
    return p;
  }
  static Prediction of_mixture(RationalDistribution d) {
    Prediction p;
    p.mixture = std::move(d);
    return p;
  }

  // probability mass placed outside the set
  Rational miss_mass(const Mask& a) const {
    if (label) return a.test(*label) ? Rational(0) : Rational(1);
    return mixture->complement_mass(a);
  }

  int sample(std::mt19937_64& rng) const {
    if (label) return *label;
    return mixture->sample(rng);
  }
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual Prediction predict(int x) = 0;
  virtual void update(int x, int s) = 0;
  virtual std::string name() const = 0;
  // true when predict always emits a bare label
  virtual bool deterministic() const { return false; }
  virtual int rounds_played() const = 0;
};

namespace detail {

// Shrinks v by the revealed set. An emptied version space means the stream
// left the hypothesis class; optionally restart from the full class instead
// of failing, for runs against non-realizable opponents.
inline Mask shrink_version_space(const ProblemInstance& pi, const Mask& v, int x, int s,
                                 bool reset_on_empty, const char* who) {
  Mask child = pi.restrict(v, x, s);
  if (child.any()) return child;
  if (!reset_on_empty)
    throw RealizabilityError(std::string(who) + ": stream was not realizable");
  Mask fresh = pi.restrict(pi.full_version_space(), x, s);
  return fresh.any() ? fresh : pi.full_version_space();
}

}  // namespace detail

// Deterministic version-space learner. Picks the label whose worst consistent
// escaping set leaves the lowest continuation dimension; labels no consistent
// set escapes are unbeatable and win outright. When the dimension is zero this
// reduces to the smallest label contained in every consistent set.
class SoaLearner : public Learner {
 public:
  explicit SoaLearner(std::shared_ptr<DimensionEngine> eng, bool reset_on_empty = false)
      : eng_(std::move(eng)),
        v_(eng_->instance().full_version_space()),
        reset_on_empty_(reset_on_empty) {}

  Prediction predict(int x) override {
    if (v_.none()) throw RealizabilityError("soa: empty version space");
    const ProblemInstance& pi = eng_->instance();
    constexpr long long kUnbeatable = std::numeric_limits<long long>::min();
    int best_y = 0;
    long long best_worst = 0;
    bool have = false;
    for (int y = 0; y < pi.num_labels(); ++y) {
      long long worst = kUnbeatable;
      for (int s = 0; s < pi.num_sets(); ++s) {
        if (pi.set_mask(s).test(y)) continue;
        Mask child = pi.restrict(v_, x, s);
        if (child.none()) continue;
        worst = std::max<long long>(worst, eng_->sldim(child));
      }
      if (!have || worst < best_worst) {
        best_y = y;
        best_worst = worst;
        have = true;
      }
    }
    return Prediction::of_label(best_y);
  }

  void update(int x, int s) override {
    v_ = detail::shrink_version_space(eng_->instance(), v_, x, s, reset_on_empty_, "soa");
    ++rounds_;
  }

  std::string name() const override { return "soa"; }
  bool deterministic() const override { return true; }
  int rounds_played() const override { return rounds_; }
  const Mask& version_space() const { return v_; }

 private:
  std::shared_ptr<DimensionEngine> eng_;
  Mask v_;
  bool reset_on_empty_;
  int rounds_ = 0;
};

// Randomized measure: level search over continuation dimensions at scale eps.
// Walking levels upward, the first collection the opponent cannot cheaply
// dodge (its game value exceeds 1-eps) supplies the measure; an empty level
// or an exhausted search falls back to the game over all consistent sets.
inline RationalDistribution rsoa_measure(DimensionEngine& eng, const Mask& v, int x,
                                         const Rational& eps) {
  if (v.none()) throw RealizabilityError("rsoa: empty version space");
  const ProblemInstance& pi = eng.instance();
  int d = eng.msdim(v, eps);
  std::vector<int> base = eng.ms_level_sets(v, x, eps, 0);
  if (base.empty()) return RationalDistribution::point_mass(0, pi.num_labels());
  for (int lvl = 0; lvl <= d; ++lvl) {
    std::vector<int> coll = lvl == 0 ? base : eng.ms_level_sets(v, x, eps, lvl);
    if (coll.empty()) break;
    const GameSolution& g = eng.game(coll);
    if (g.value > Rational(1) - eps) return g.mu;
  }
  return eng.game(base).mu;
}

class RsoaLearner : public Learner {
 public:
  RsoaLearner(std::shared_ptr<DimensionEngine> eng, Rational eps, bool reset_on_empty = false)
      : eng_(std::move(eng)), eps_(std::move(eps)), reset_on_empty_(reset_on_empty) {
    if (eps_ <= 0 || eps_ > 1) throw ConfigError("rsoa: epsilon must lie in (0, 1]");
    v_ = eng_->instance().full_version_space();
  }

  Prediction predict(int x) override {
    return Prediction::of_mixture(rsoa_measure(*eng_, v_, x, eps_));
  }

  void update(int x, int s) override {
    v_ = detail::shrink_version_space(eng_->instance(), v_, x, s, reset_on_empty_, "rsoa");
    ++rounds_;
  }

  std::string name() const override { return "rsoa"; }
  int rounds_played() const override { return rounds_; }
  const Mask& version_space() const { return v_; }

 private:
  std::shared_ptr<DimensionEngine> eng_;
  Rational eps_;
  bool reset_on_empty_;
  Mask v_;
  int rounds_ = 0;
};

// Scale selection: the smallest index whose measure chain is tight up to it
// yet separates from its successor, both checked exactly over the given sets.
// Returns a 1-based index into measures; N when no index qualifies.
inline int msp(const std::vector<RationalDistribution>& measures,
               const std::vector<Rational>& gammas, const std::vector<Mask>& valid_sets) {
  int n = static_cast<int>(measures.size());
  if (n < 1) throw ConfigError("msp: need at least one measure");
  if (static_cast<int>(gammas.size()) != n) throw ConfigError("msp: gamma count mismatch");
  if (valid_sets.empty()) throw ConfigError("msp: no valid sets");
  auto dev = [&](int i, int j, bool want_sup) {
    Rational extreme;
    bool first = true;
    for (const Mask& a : valid_sets) {
      Rational d = measures[i].complement_mass(a) - measures[j].complement_mass(a);
      if (d < 0) d = -d;
      if (first || (want_sup ? d > extreme : d < extreme)) extreme = d;
      first = false;
    }
    return extreme;
  };
  for (int m = 1; m <= n - 1; ++m) {
    bool chain = true;
    for (int i = 2; i <= m && chain; ++i)
      chain = dev(i - 1, i - 2, true) <= 2 * gammas[i - 2];
    if (!chain) continue;
    if (dev(m - 1, m, false) >= 2 * gammas[m - 1]) return m;
  }
  return n;
}

// Runs the level-search measure at every dyadic scale 2^-1 .. 2^-N and lets
// the scale selector pick which one to play.
class MsolLearner : public Learner {
 public:
  MsolLearner(std::shared_ptr<DimensionEngine> eng, int num_scales,
              bool reset_on_empty = false)
      : eng_(std::move(eng)), reset_on_empty_(reset_on_empty) {
    if (num_scales < 1) throw ConfigError("msol: need at least one scale");
    for (int i = 1; i <= num_scales; ++i) gammas_.push_back(make_rational(1, Int(1) << i));
    v_ = eng_->instance().full_version_space();
  }

  Prediction predict(int x) override {
    if (v_.none()) throw RealizabilityError("msol: empty version space");
    const ProblemInstance& pi = eng_->instance();
    const Rational& finest = gammas_.back();
    if (eng_->msdim(v_, finest) == 0)
      return Prediction::of_mixture(rsoa_measure(*eng_, v_, x, finest));
    std::vector<Mask> valid;
    for (int s : pi.consistent_sets(v_, x)) valid.push_back(pi.set_mask(s));
    if (valid.empty())
      return Prediction::of_mixture(
          RationalDistribution::point_mass(0, pi.num_labels()));
    std::vector<RationalDistribution> mus;
    mus.reserve(gammas_.size());
    for (const Rational& g : gammas_) mus.push_back(rsoa_measure(*eng_, v_, x, g));
    int m = msp(mus, gammas_, valid);
    return Prediction::of_mixture(mus[m - 1]);
  }

  void update(int x, int s) override {
    v_ = detail::shrink_version_space(eng_->instance(), v_, x, s, reset_on_empty_, "msol");
    ++rounds_;
  }

  std::string name() const override { return "msol"; }
  int rounds_played() const override { return rounds_; }
  const Mask& version_space() const { return v_; }
  const std::vector<Rational>& scales() const { return gammas_; }

 private:
  std::shared_ptr<DimensionEngine> eng_;
  std::vector<Rational> gammas_;
  bool reset_on_empty_;
  Mask v_;
  int rounds_ = 0;
};

// Exponential-weights aggregation over replayed-subset experts. Each expert
// replays the randomized learner but folds in feedback only on its own subset
// of rounds, so a horizon is fixed up front. Exact mode emits the weighted
// mixture and charges each expert its expected loss; sample mode draws one
// expert per round and charges sampled 0/1 losses.
class AgnosticLearner : public Learner {
 public:
  AgnosticLearner(std::shared_ptr<DimensionEngine> eng, Rational eps, int horizon,
                  bool sample_mode = false, uint64_t seed = 0)
      : eng_(std::move(eng)),
        eps_(std::move(eps)),
        horizon_(horizon),
        sample_mode_(sample_mode),
        rng_(seed) {
    if (eps_ <= 0 || eps_ > 1) throw ConfigError("agnostic: epsilon must lie in (0, 1]");
    if (horizon_ < 1) throw ConfigError("agnostic: horizon must be positive");
    const ProblemInstance& pi = eng_->instance();
    int cap = eng_->msdim(pi.full_version_space(), eps_);
    Int count = 0;
    for (int i = 0; i <= cap && i <= horizon_; ++i) count += binomial(horizon_, i);
    if (count > 10'000) throw GuardError("agnostic: expert budget exceeded (limit 10000)");
    enumerate_subsets(cap);
    weights_.assign(experts_.size(), Rational(1));
    // learning rate sqrt(2 ln |E| / T), evaluated in exact arithmetic
    Rational ln_e = experts_.size() > 1 ? approx_ln(Int(experts_.size()), 64) : Rational(0);
    eta_ = ln_e == 0 ? Rational(0) : approx_sqrt(2 * ln_e / horizon_, 64);
    states_.assign(experts_.size(), pi.full_version_space());
  }

  Prediction predict(int x) override {
    if (round_ >= horizon_) throw ConfigError("agnostic: horizon exhausted");
    const ProblemInstance& pi = eng_->instance();
    last_measures_.clear();
    last_measures_.reserve(experts_.size());
    std::map<Mask, RationalDistribution> cache;
    for (const Mask& v : states_) {
      auto it = cache.find(v);
      if (it == cache.end())
        it = cache.emplace(v, rsoa_measure(*eng_, v, x, eps_)).first;
      last_measures_.push_back(it->second);
    }
    if (sample_mode_) return Prediction::of_mixture(last_measures_[sample_expert()]);
    std::vector<Rational> mix(pi.num_labels(), Rational(0));
    Rational total = 0;
    for (size_t e = 0; e < experts_.size(); ++e) total += weights_[e];
    for (size_t e = 0; e < experts_.size(); ++e)
      for (int y = 0; y < pi.num_labels(); ++y)
        mix[y] += weights_[e] * last_measures_[e].weight(y) / total;
    // re-normalize exactly: accumulated rounding is impossible in rationals,
    // but the division above already makes the sum exactly 1
    return Prediction::of_mixture(RationalDistribution(std::move(mix)));
  }

  void update(int x, int s) override {
    if (last_measures_.size() != experts_.size())
      throw ConfigError("agnostic: update before predict");
    const ProblemInstance& pi = eng_->instance();
    const Mask& a = pi.set_mask(s);
    for (size_t e = 0; e < experts_.size(); ++e) {
      Rational loss = sample_mode_
                          ? Rational(a.test(last_measures_[e].sample(rng_)) ? 0 : 1)
                          : last_measures_[e].complement_mass(a);
      if (eta_ != 0 && loss != 0) {
        Rational w = weights_[e] * approx_exp_neg(eta_ * loss, 96);
        w = floor_to_bits(w, 128);
        if (w == 0) w = make_rational(1, Int(1) << 128);
        weights_[e] = w;
      }
      if (expert_updates_here(e)) {
        Mask child = pi.restrict(states_[e], x, s);
        if (child.any()) states_[e] = child;  // a vacated expert keeps its state
      }
    }
    last_measures_.clear();
    ++round_;
  }

  std::string name() const override { return "agnostic"; }
  int rounds_played() const override { return round_; }
  int num_experts() const { return static_cast<int>(experts_.size()); }
  const Rational& learning_rate() const { return eta_; }

 private:
  static Int binomial(int n, int k) {
    Int r = 1;
    for (int i = 0; i < k; ++i) {
      r *= n - i;
      r /= i + 1;
    }
    return r;
  }

  void enumerate_subsets(int cap) {
    experts_.push_back({});
    std::vector<int> pick;
    for (int size = 1; size <= cap && size <= horizon_; ++size) {
      pick.assign(size, 0);
      for (int i = 0; i < size; ++i) pick[i] = i;
      while (true) {
        experts_.push_back(pick);
        int i = size - 1;
        while (i >= 0 && pick[i] == horizon_ - size + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
  }

  bool expert_updates_here(size_t e) const {
    const std::vector<int>& rounds = experts_[e];
    return std::binary_search(rounds.begin(), rounds.end(), round_);
  }

  size_t sample_expert() {
    Rational total = 0;
    for (const Rational& w : weights_) total += w;
    Rational u = Rational(Int(rng_())) / (Rational(Int(1) << 64));
    Rational cum = 0;
    for (size_t e = 0; e < weights_.size(); ++e) {
      cum += weights_[e];
      if (u * total < cum) return e;
    }
    return weights_.size() - 1;
  }

  std::shared_ptr<DimensionEngine> eng_;
  Rational eps_;
  int horizon_;
  bool sample_mode_;
  std::mt19937_64 rng_;
  std::vector<std::vector<int>> experts_;  // sorted round subsets, size order then lex
  std::vector<Rational> weights_;
  std::vector<Mask> states_;
  std::vector<RationalDistribution> last_measures_;
  Rational eta_;
  int round_ = 0;
};

class UniformLearner : public Learner {
 public:
  explicit UniformLearner(int num_labels) : m_(num_labels) {
    if (m_ < 1) throw ConfigError("uniform: need at least one label");
  }
  Prediction predict(int) override {
    return Prediction::of_mixture(RationalDistribution::uniform_over(Mask::full(m_)));
  }
  void update(int, int) override { ++rounds_; }
  std::string name() const override { return "uniform"; }
  int rounds_played() const override { return rounds_; }

 private:
  int m_;
  int rounds_ = 0;
};

class ConstantLearner : public Learner {
 public:
  ConstantLearner(int num_labels, int label) : m_(num_labels), y_(label) {
    if (y_ < 0 || y_ >= m_) throw ConfigError("constant: label out of range");
  }
  Prediction predict(int) override { return Prediction::of_label(y_); }
  void update(int, int) override { ++rounds_; }
  std::string name() const override { return "constant"; }
  bool deterministic() const override { return true; }
  int rounds_played() const override { return rounds_; }

 private:
  int m_, y_;
  int rounds_ = 0;
};

// Hand-rolled strategy for the six-label three-set showcase system: uniform
// over the three shared labels first, then uniform over their overlap with
// the previous round's feedback set.
class Example3Learner : public Learner {
 public:
  explicit Example3Learner(std::shared_ptr<const ProblemInstance> inst)
      : inst_(std::move(inst)) {
    if (!is_example3(*inst_))
      throw ConfigError("example3 learner: instance is not the showcase system");
    core_ = Mask(inst_->num_labels());
    core_.set(3);
    core_.set(4);
    core_.set(5);
  }

  Prediction predict(int) override {
    Mask support = last_set_ < 0 ? core_ : core_ & inst_->set_mask(last_set_);
    return Prediction::of_mixture(RationalDistribution::uniform_over(support));
  }

  void update(int, int s) override {
    last_set_ = s;
    ++rounds_;
  }

  std::string name() const override { return "example3"; }
  int rounds_played() const override { return rounds_; }

 private:
  std::shared_ptr<const ProblemInstance> inst_;
  Mask core_;
  int last_set_ = -1;
  int rounds_ = 0;
};

struct LearnerOptions {
  Rational epsilon{1, 3};
  int scales = 2;
  int constant_label = 0;
  int horizon = 0;       // agnostic only; must be positive there
  bool sample_mode = false;
  uint64_t seed = 0;
  bool reset_on_empty = false;
};

inline std::unique_ptr<Learner> make_learner(const std::string& kind,
                                             std::shared_ptr<DimensionEngine> eng,
                                             const LearnerOptions& opt = {}) {
  const ProblemInstance& pi = eng->instance();
  if (kind == "soa") return std::make_unique<SoaLearner>(eng, opt.reset_on_empty);
  if (kind == "rsoa")
    return std::make_unique<RsoaLearner>(eng, opt.epsilon, opt.reset_on_empty);
  if (kind == "msol")
    return std::make_unique<MsolLearner>(eng, opt.scales, opt.reset_on_empty);
  if (kind == "agnostic")
    return std::make_unique<AgnosticLearner>(eng, opt.epsilon, opt.horizon,
                                             opt.sample_mode, opt.seed);
  if (kind == "uniform") return std::make_unique<UniformLearner>(pi.num_labels());
  if (kind == "constant")
    return std::make_unique<ConstantLearner>(pi.num_labels(), opt.constant_label);
  if (kind == "example3") return std::make_unique<Example3Learner>(eng->instance_ptr());
  throw ConfigError("unknown learner: " + kind);
}

}  // namespace sfl

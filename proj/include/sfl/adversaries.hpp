#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sfl/dims.hpp"
#include "sfl/errors.hpp"
#include "sfl/learners.hpp"
#include "sfl/model.hpp"

namespace sfl {

// Stream source that may react to the learner's emitted prediction (always
// the measure or label itself, never a sampled draw). A realizable-kind
// adversary promises every emitted prefix stays consistent with some
// hypothesis; the harness enforces the promise.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::optional<int> next_instance() = 0;
  virtual int reveal(const Prediction& pred) = 0;
  virtual std::string name() const = 0;
  virtual bool realizable() const = 0;
};

// Walks a labelwise witness tree against a label-emitting learner: reveal the
// edge set indexed by the predicted label (it excludes that label), descend.
class TreeAdversary : public Adversary {
 public:
  TreeAdversary(std::shared_ptr<const ProblemInstance> inst, WitnessTree tree)
      : inst_(std::move(inst)), tree_(std::move(tree)) {
    if (tree_.kind != WitnessTree::Kind::Labelwise)
      throw ConfigError("tree adversary: witness must be labelwise");
    if (auto err = validate_witness(*inst_, tree_))
      throw ConfigError("tree adversary: " + *err);
    cursor_ = tree_.root.get();
  }

  std::optional<int> next_instance() override {
    if (cursor_ == nullptr || cursor_->is_leaf()) return std::nullopt;
    return cursor_->instance;
  }

  int reveal(const Prediction& pred) override {
    if (cursor_ == nullptr || cursor_->is_leaf())
      throw ConfigError("tree adversary: stream exhausted");
    if (!pred.label)
      throw ConfigError("tree adversary: requires a deterministic learner");
    int y = *pred.label;
    int s = cursor_->edge_sets.at(y);
    cursor_ = cursor_->children[y].get();
    return s;
  }

  std::string name() const override { return "tree"; }
  bool realizable() const override { return true; }

 private:
  std::shared_ptr<const ProblemInstance> inst_;
  WitnessTree tree_;
  const WitnessNode* cursor_ = nullptr;
};

// Adaptive opponent at scale gamma: while the version space still has
// positive dimension, show the instance witnessing it, then reveal a
// consistent set the learner's measure covers by at most 1-gamma, preferring
// the highest continuation dimension (smallest set index on ties).
class MsAdaptiveAdversary : public Adversary {
 public:
  MsAdaptiveAdversary(std::shared_ptr<DimensionEngine> eng, Rational gamma)
      : eng_(std::move(eng)), gamma_(std::move(gamma)) {
    if (gamma_ < 0 || gamma_ > 1) throw ConfigError("ms adversary: gamma out of [0,1]");
    v_ = eng_->instance().full_version_space();
  }

  std::optional<int> next_instance() override {
    const ProblemInstance& pi = eng_->instance();
    int d = eng_->msdim(v_, gamma_);
    if (d < 1) return std::nullopt;
    for (int x = 0; x < pi.num_instances(); ++x) {
      std::vector<int> coll = eng_->ms_level_sets(v_, x, gamma_, d - 1);
      if (coll.empty()) continue;
      bool unavoidable;
      if (gamma_ == 0) {
        Mask inter = Mask::full(pi.num_labels());
        for (int s : coll) inter = inter & pi.set_mask(s);
        unavoidable = inter.none();
      } else {
        unavoidable = eng_->game(coll).value <= Rational(1) - gamma_;
      }
      if (unavoidable) {
        x_cur_ = x;
        return x;
      }
    }
    return std::nullopt;
  }

  int reveal(const Prediction& pred) override {
    const ProblemInstance& pi = eng_->instance();
    const Rational cap = Rational(1) - gamma_;
    int best_s = -1;
    int best_dim = -1;
    for (int s = 0; s < pi.num_sets(); ++s) {
      Mask child = pi.restrict(v_, x_cur_, s);
      if (child.none()) continue;
      if (pred.miss_mass(pi.set_mask(s)) < gamma_) continue;  // mass(A) > 1-gamma
      int dim = eng_->msdim(child == v_ ? v_ : child, gamma_);
      if (dim > best_dim) {
        best_dim = dim;
        best_s = s;
      }
    }
    if (best_s < 0)
      throw ConfigError("ms adversary: no qualifying set, dimension witness broken");
    v_ = pi.restrict(v_, x_cur_, best_s);
    return best_s;
  }

  std::string name() const override { return "ms"; }
  bool realizable() const override { return true; }
  const Mask& version_space() const { return v_; }

 private:
  std::shared_ptr<DimensionEngine> eng_;
  Rational gamma_;
  Mask v_;
  int x_cur_ = 0;
};

// Oblivious sign-flip stream over a depth-d two-branch witness: kd rounds of
// uniform signs, one witness level per block of k, each block replayed at the
// node selected by the majority signs of the blocks before it. The sign
// convention maps +1 to edge 1. The comparator hypothesis sits at the leaf
// the majority path reaches.
class KhinchineAdversary : public Adversary {
 public:
  KhinchineAdversary(std::shared_ptr<const ProblemInstance> inst, WitnessTree tree, int k,
                     uint64_t seed)
      : inst_(std::move(inst)), tree_(std::move(tree)), k_(k) {
    if (tree_.kind != WitnessTree::Kind::Branching || tree_.p != 2)
      throw ConfigError("khinchine adversary: needs a two-branch witness");
    if (auto err = validate_witness(*inst_, tree_))
      throw ConfigError("khinchine adversary: " + *err);
    if (k_ < 1 || k_ % 2 == 0) throw ConfigError("khinchine adversary: k must be odd");
    int d = tree_.depth;
    std::mt19937_64 rng(seed);
    signs_.resize(static_cast<size_t>(k_) * d);
    for (auto& s : signs_) s = (rng() & 1) ? +1 : -1;
    const WitnessNode* node = tree_.root.get();
    for (int i = 0; i < d; ++i) {
      block_nodes_.push_back(node);
      int sum = 0;
      for (int t = i * k_; t < (i + 1) * k_; ++t) sum += signs_[t];
      int dir = sum > 0 ? 1 : 0;  // k odd, sum is never zero
      block_signs_.push_back(sum > 0 ? +1 : -1);
      node = node->children[dir].get();
    }
    comparator_ = node->leaf_hypothesis;
  }

  std::optional<int> next_instance() override {
    if (t_ >= static_cast<int>(signs_.size())) return std::nullopt;
    return block_nodes_[t_ / k_]->instance;
  }

  int reveal(const Prediction&) override {
    if (t_ >= static_cast<int>(signs_.size()))
      throw ConfigError("khinchine adversary: stream exhausted");
    const WitnessNode* node = block_nodes_[t_ / k_];
    int dir = signs_[t_] > 0 ? 1 : 0;
    ++t_;
    return node->edge_sets[dir];
  }

  std::string name() const override { return "khinchine"; }
  bool realizable() const override { return false; }
  int comparator_hypothesis() const { return comparator_; }
  const std::vector<int>& signs() const { return signs_; }
  const std::vector<int>& block_signs() const { return block_signs_; }

 private:
  std::shared_ptr<const ProblemInstance> inst_;
  WitnessTree tree_;
  int k_;
  std::vector<int> signs_;
  std::vector<int> block_signs_;
  std::vector<const WitnessNode*> block_nodes_;
  int comparator_ = -1;
  int t_ = 0;
};

inline bool is_cosingleton_system(const ProblemInstance& pi) {
  int m = pi.num_labels();
  if (pi.num_sets() != m || m < 2 || pi.num_instances() != 1) return false;
  Mask seen(m);
  for (int s = 0; s < m; ++s) {
    if (pi.set_mask(s).count() != m - 1) return false;
    seen = seen | pi.set_mask(s).complement();
  }
  if (seen.count() != m) return false;
  for (const auto& row : pi.hypotheses())
    if (static_cast<int>(row.size()) != 1) return false;
  return true;
}

// On a cosingleton system, reveals the set missing the learner's pick (the
// heaviest label for measure predictions) for as long as that keeps some
// constant hypothesis alive; afterwards reveals safe sets only.
class SeparationAdversary : public Adversary {
 public:
  explicit SeparationAdversary(std::shared_ptr<const ProblemInstance> inst)
      : inst_(std::move(inst)) {
    if (!is_cosingleton_system(*inst_))
      throw ConfigError("separation adversary: needs a cosingleton system");
    int m = inst_->num_labels();
    alive_ = Mask(m);
    set_missing_.assign(m, -1);
    for (int s = 0; s < inst_->num_sets(); ++s)
      set_missing_[inst_->set_mask(s).complement().first()] = s;
    for (const auto& row : inst_->hypotheses()) alive_.set(row[0]);
  }

  std::optional<int> next_instance() override { return 0; }

  int reveal(const Prediction& pred) override {
    int y = pred.label ? *pred.label : heaviest_label(*pred.mixture);
    Mask rest = alive_;
    rest.reset(y);
    if (rest.any()) {
      alive_ = rest;
      return set_missing_[y];
    }
    int survivor = alive_.first();
    for (int s = 0; s < inst_->num_sets(); ++s)
      if (inst_->set_mask(s).test(survivor)) return s;
    throw ConfigError("separation adversary: no safe set");
  }

  std::string name() const override { return "separation"; }
  bool realizable() const override { return true; }
  const Mask& alive() const { return alive_; }

 private:
  static int heaviest_label(const RationalDistribution& mu) {
    int best = 0;
    for (int y = 1; y < mu.num_labels(); ++y)
      if (mu.weight(y) > mu.weight(best)) best = y;
    return best;
  }

  std::shared_ptr<const ProblemInstance> inst_;
  Mask alive_;
  std::vector<int> set_missing_;
};

class ScriptedAdversary : public Adversary {
 public:
  ScriptedAdversary(std::shared_ptr<const ProblemInstance> inst, Stream stream,
                    bool claims_realizable = false)
      : inst_(std::move(inst)), stream_(std::move(stream)), realizable_(claims_realizable) {
    for (const StreamRound& r : stream_) inst_->check_round(r);
  }

  std::optional<int> next_instance() override {
    if (pos_ >= stream_.size()) return std::nullopt;
    return stream_[pos_].instance;
  }

  int reveal(const Prediction&) override {
    if (pos_ >= stream_.size()) throw ConfigError("scripted adversary: stream exhausted");
    return stream_[pos_++].set;
  }

  std::string name() const override { return "scripted"; }
  bool realizable() const override { return realizable_; }

 private:
  std::shared_ptr<const ProblemInstance> inst_;
  Stream stream_;
  size_t pos_ = 0;
  bool realizable_;
};

// Samples rounds independently from a fixed weighted menu of (instance, set)
// pairs; exact rational inverse-CDF over one 64-bit draw per round.
class IidAdversary : public Adversary {
 public:
  struct WeightedRound {
    int instance;
    int set;
    Rational weight;
  };

  IidAdversary(std::shared_ptr<const ProblemInstance> inst, std::vector<WeightedRound> menu,
               uint64_t seed)
      : inst_(std::move(inst)), menu_(std::move(menu)), rng_(seed) {
    if (menu_.empty()) throw ConfigError("iid adversary: empty menu");
    total_ = 0;
    for (const WeightedRound& w : menu_) {
      inst_->check_round({w.instance, w.set});
      if (w.weight <= 0) throw ConfigError("iid adversary: weights must be positive");
      total_ += w.weight;
    }
  }

  std::optional<int> next_instance() override {
    Rational u = Rational(Int(rng_())) / Rational(Int(1) << 64);
    Rational cum = 0;
    pending_ = menu_.size() - 1;
    for (size_t i = 0; i < menu_.size(); ++i) {
      cum += menu_[i].weight;
      if (u * total_ < cum) {
        pending_ = i;
        break;
      }
    }
    return menu_[pending_].instance;
  }

  int reveal(const Prediction&) override { return menu_[pending_].set; }

  std::string name() const override { return "iid"; }
  bool realizable() const override { return false; }

 private:
  std::shared_ptr<const ProblemInstance> inst_;
  std::vector<WeightedRound> menu_;
  std::mt19937_64 rng_;
  Rational total_;
  size_t pending_ = 0;
};

}  // namespace sfl

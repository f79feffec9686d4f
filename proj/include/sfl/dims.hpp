#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfl/errors.hpp"
#include "sfl/game.hpp"
#include "sfl/mask.hpp"
#include "sfl/model.hpp"
#include "sfl/rational.hpp"

namespace sfl {

// Shattering certificate. Labelwise trees carry one edge per label at every
// internal node; branching trees carry a fixed number p of edges whose
// revealed sets have empty mutual intersection. Leaves name a hypothesis
// consistent with every (instance, set) pair along their path.
struct WitnessNode {
  int instance = -1;
  int leaf_hypothesis = -1;
  std::vector<int> edge_sets;
  std::vector<std::unique_ptr<WitnessNode>> children;
  bool is_leaf() const { return children.empty(); }
};

struct WitnessTree {
  enum class Kind { Labelwise, Branching };
  Kind kind = Kind::Labelwise;
  int p = 0;  // branching arity, Branching only
  int depth = 0;
  std::unique_ptr<WitnessNode> root;
};

namespace detail {

inline std::optional<std::string> validate_witness_walk(const ProblemInstance& inst,
                                                        const WitnessTree& tree,
                                                        const WitnessNode* node, int depth_left,
                                                        std::vector<StreamRound>& path) {
  if (node == nullptr) return "witness: missing node";
  if (depth_left == 0) {
    if (!node->is_leaf()) return "witness: internal node below stated depth";
    int h = node->leaf_hypothesis;
    if (h < 0 || h >= inst.num_hypotheses()) return "witness: leaf hypothesis out of range";
    for (const StreamRound& r : path)
      if (!inst.set_mask(r.set).test(inst.label_of(h, r.instance)))
        return "witness: leaf hypothesis inconsistent with its path";
    return std::nullopt;
  }
  if (node->is_leaf()) return "witness: leaf above stated depth";
  if (node->instance < 0 || node->instance >= inst.num_instances())
    return "witness: instance index out of range";
  int want_edges = tree.kind == WitnessTree::Kind::Labelwise ? inst.num_labels() : tree.p;
  if (static_cast<int>(node->edge_sets.size()) != want_edges ||
      node->children.size() != node->edge_sets.size())
    return "witness: wrong edge count";
  if (tree.kind == WitnessTree::Kind::Labelwise) {
    for (int y = 0; y < want_edges; ++y) {
      int s = node->edge_sets[y];
      if (s < 0 || s >= inst.num_sets()) return "witness: edge set out of range";
      if (inst.set_mask(s).test(y)) return "witness: edge set contains its own label";
    }
  } else {
    Mask inter = Mask::full(inst.num_labels());
    for (int s : node->edge_sets) {
      if (s < 0 || s >= inst.num_sets()) return "witness: edge set out of range";
      inter = inter & inst.set_mask(s);
    }
    if (inter.any()) return "witness: sibling sets have a common label";
  }
  for (size_t e = 0; e < node->edge_sets.size(); ++e) {
    path.push_back({node->instance, node->edge_sets[e]});
    auto err =
        validate_witness_walk(inst, tree, node->children[e].get(), depth_left - 1, path);
    path.pop_back();
    if (err) return err;
  }
  return std::nullopt;
}

}  // namespace detail

// nullopt when the tree is a valid shattering certificate for the instance.
inline std::optional<std::string> validate_witness(const ProblemInstance& inst,
                                                   const WitnessTree& tree) {
  if (tree.kind == WitnessTree::Kind::Branching && tree.p < 2)
    return "witness: branching arity below 2";
  if (tree.depth < 0) return "witness: negative depth";
  std::vector<StreamRound> path;
  return detail::validate_witness_walk(inst, tree, tree.root.get(), tree.depth, path);
}

struct HellyResult {
  int value = 0;
  bool vacuous = false;  // no subfamily has empty intersection
};

struct RelationsReport {
  int sldim = 0;
  int psldim = 0;
  int msdim = 0;
  HellyResult helly;
  bool sandwich_ok = false;     // psldim <= msdim <= sldim
  bool equality_checked = false;
  bool equality_ok = true;      // psldim == msdim == sldim when p matches helly
  bool ok() const { return sandwich_ok && (!equality_checked || equality_ok); }
};

// Exact combinatorial dimensions of a version space, memoized per mask. All
// recursions walk the version-space lattice; a revealed set that leaves the
// version space unchanged feeds the level below the one being established, so
// it counts as reachable without recursing.
class DimensionEngine {
 public:
  explicit DimensionEngine(std::shared_ptr<const ProblemInstance> inst,
                           bool enable_fast_paths = true)
      : inst_(std::move(inst)) {
    const ProblemInstance& pi = *inst_;
    sets_excluding_.assign(pi.num_labels(), {});
    for (int y = 0; y < pi.num_labels(); ++y)
      for (int s = 0; s < pi.num_sets(); ++s)
        if (!pi.set_mask(s).test(y)) sets_excluding_[y].push_back(s);
    cosingleton_constants_ = enable_fast_paths && detect_cosingleton_constants();
  }

  const ProblemInstance& instance() const { return *inst_; }
  std::shared_ptr<const ProblemInstance> instance_ptr() const { return inst_; }

  // --- multiclass online dimension (singleton feedback semantics) ---------
  int ldim() { return ldim(inst_->full_version_space()); }
  int ldim(const Mask& v) {
    if (v.none()) return -1;
    auto it = ld_memo_.find(v);
    if (it != ld_memo_.end()) return it->second;
    int best = 0;
    const ProblemInstance& pi = *inst_;
    for (int x = 0; x < pi.num_instances(); ++x)
      for (int y = 0; y < pi.num_labels(); ++y) {
        Mask vy = v & pi.output_mask(x, y);
        if (vy.none()) continue;
        for (int y2 = y + 1; y2 < pi.num_labels(); ++y2) {
          Mask vy2 = v & pi.output_mask(x, y2);
          if (vy2.none()) continue;
          int cand = 1 + std::min(ldim(vy), ldim(vy2));
          if (cand > best) best = cand;
        }
      }
    ld_memo_.emplace(v, best);
    return best;
  }

  // --- labelwise set-feedback dimension ------------------------------------
  int sldim() { return sldim(inst_->full_version_space()); }
  int sldim(const Mask& v) {
    if (v.none()) return -1;
    if (cosingleton_constants_) return v.count() - 1;
    auto it = sl_memo_.find(v);
    if (it != sl_memo_.end()) return it->second;
    int d = 0;
    while (sl_reaches(v, d + 1)) ++d;
    sl_memo_.emplace(v, d);
    return d;
  }

  WitnessTree sl_witness() { return sl_witness(inst_->full_version_space()); }
  WitnessTree sl_witness(const Mask& v) {
    if (v.none()) throw ConfigError("sl_witness: empty version space");
    WitnessTree tree;
    tree.kind = WitnessTree::Kind::Labelwise;
    tree.depth = sldim(v);
    tree.root = build_sl_node(v, tree.depth);
    return tree;
  }

  // --- branching set-feedback dimension -------------------------------------
  int psldim(int p) { return psldim(inst_->full_version_space(), p); }
  int psldim(const Mask& v, int p) {
    if (p < 2) throw ConfigError("psldim: p must be at least 2");
    if (v.none()) return -1;
    auto& memo = psl_memo_[p];
    auto it = memo.find(v);
    if (it != memo.end()) return it->second;
    const auto& fams = minimal_families();
    int d = 0;
    while (psl_reaches(v, p, d + 1, fams)) ++d;
    memo.emplace(v, d);
    return d;
  }

  WitnessTree psl_witness(int p) { return psl_witness(inst_->full_version_space(), p); }
  WitnessTree psl_witness(const Mask& v, int p) {
    if (v.none()) throw ConfigError("psl_witness: empty version space");
    WitnessTree tree;
    tree.kind = WitnessTree::Kind::Branching;
    tree.p = p;
    tree.depth = psldim(v, p);
    tree.root = build_psl_node(v, p, tree.depth);
    return tree;
  }

  // --- mixture set-feedback dimension at scale gamma ------------------------
  int msdim(const Rational& gamma) { return msdim(inst_->full_version_space(), gamma); }
  int msdim(const Mask& v, const Rational& gamma) {
    if (gamma < 0 || gamma > 1) throw ConfigError("msdim: gamma out of [0,1]");
    if (v.none()) return -1;
    auto& memo = ms_memo_[gamma];
    auto it = memo.find(v);
    if (it != memo.end()) return it->second;
    int d = 0;
    while (ms_reaches(v, gamma, d + 1)) ++d;
    memo.emplace(v, d);
    return d;
  }

  // Sets the opponent can reveal at (v, x) whose continuation dimension at
  // scale gamma is at least `level`; the collection RSOA's level search prices.
  std::vector<int> ms_level_sets(const Mask& v, int x, const Rational& gamma, int level) {
    std::vector<int> out;
    const ProblemInstance& pi = *inst_;
    for (int s = 0; s < pi.num_sets(); ++s) {
      Mask child = pi.restrict(v, x, s);
      if (child.none()) continue;
      if (child == v ? msdim(v, gamma) >= level : msdim(child, gamma) >= level)
        out.push_back(s);
    }
    return out;
  }

  // --- helly number ----------------------------------------------------------
  HellyResult helly_number() {
    const auto& fams = minimal_families();
    HellyResult r;
    if (fams.empty()) {
      r.vacuous = true;
      return r;
    }
    for (const auto& f : fams) r.value = std::max(r.value, static_cast<int>(f.size()));
    return r;
  }

  // Inclusion-minimal subfamilies with empty intersection, each sorted by set
  // index, the list ordered by (size, indices). Enumerated once per engine.
  const std::vector<std::vector<int>>& minimal_families() {
    if (!families_done_) {
      enumerate_minimal_families();
      families_done_ = true;
    }
    return minimal_families_;
  }

  // --- exact game solves, cached by collection ------------------------------
  const GameSolution& game(const std::vector<int>& set_indices) {
    auto it = game_cache_.find(set_indices);
    if (it != game_cache_.end()) return it->second;
    return game_cache_.emplace(set_indices, solve_set_game(*inst_, set_indices)).first->second;
  }

  RelationsReport check_relations(int p, const Rational& gamma) {
    if (p < 2) throw ConfigError("check_relations: p must be at least 2");
    if (gamma < 0 || gamma * p > 1)
      throw ConfigError("check_relations: gamma out of [0, 1/p]");
    RelationsReport rep;
    rep.sldim = sldim();
    rep.psldim = psldim(p);
    rep.msdim = msdim(gamma);
    rep.helly = helly_number();
    rep.sandwich_ok = rep.psldim <= rep.msdim && rep.msdim <= rep.sldim;
    if (!rep.helly.vacuous && rep.helly.value == p) {
      rep.equality_checked = true;
      rep.equality_ok = rep.psldim == rep.msdim && rep.msdim == rep.sldim;
    }
    return rep;
  }

 private:
  bool detect_cosingleton_constants() const {
    const ProblemInstance& pi = *inst_;
    int m = pi.num_labels();
    if (pi.num_sets() != m || m < 2) return false;
    Mask seen(m);
    for (int s = 0; s < pi.num_sets(); ++s) {
      if (pi.set_mask(s).count() != m - 1) return false;
      seen = seen | pi.set_mask(s).complement();
    }
    if (seen.count() != m) return false;
    for (const auto& row : pi.hypotheses())
      for (int y : row)
        if (y != row[0]) return false;
    return true;  // distinct constants: rows are deduplicated
  }

  bool sl_reaches(const Mask& v, int target) {
    const ProblemInstance& pi = *inst_;
    for (int x = 0; x < pi.num_instances(); ++x)
      if (sl_node_ok(v, x, target)) return true;
    return false;
  }

  // Every label needs an escaping set whose restricted version space shatters
  // one level lower. A set leaving v untouched qualifies automatically: the
  // level below `target` is already established for v itself.
  bool sl_node_ok(const Mask& v, int x, int target) {
    const ProblemInstance& pi = *inst_;
    for (int y = 0; y < pi.num_labels(); ++y) {
      bool ok = false;
      for (int s : sets_excluding_[y]) {
        Mask child = pi.restrict(v, x, s);
        if (child.none()) continue;
        if (child == v || sldim(child) >= target - 1) {
          ok = true;
          break;
        }
      }
      if (!ok) return false;
    }
    return true;
  }

  std::unique_ptr<WitnessNode> build_sl_node(const Mask& v, int depth) {
    auto node = std::make_unique<WitnessNode>();
    if (depth == 0) {
      node->leaf_hypothesis = v.first();
      return node;
    }
    const ProblemInstance& pi = *inst_;
    int x_pick = -1;
    for (int x = 0; x < pi.num_instances() && x_pick < 0; ++x)
      if (sl_node_ok(v, x, depth)) x_pick = x;
    if (x_pick < 0) throw ConfigError("sl_witness: internal extraction failure");
    node->instance = x_pick;
    for (int y = 0; y < pi.num_labels(); ++y) {
      int s_pick = -1;
      Mask child_pick;
      for (int s : sets_excluding_[y]) {
        Mask child = pi.restrict(v, x_pick, s);
        if (child.none()) continue;
        if (child == v || sldim(child) >= depth - 1) {
          s_pick = s;
          child_pick = child;
          break;
        }
      }
      if (s_pick < 0) throw ConfigError("sl_witness: internal extraction failure");
      node->edge_sets.push_back(s_pick);
      node->children.push_back(build_sl_node(child_pick, depth - 1));
    }
    return node;
  }

  bool psl_reaches(const Mask& v, int p, int target,
                   const std::vector<std::vector<int>>& fams) {
    const ProblemInstance& pi = *inst_;
    for (int x = 0; x < pi.num_instances(); ++x)
      for (const auto& fam : fams) {
        if (static_cast<int>(fam.size()) > p) continue;
        bool all_ok = true;
        for (int s : fam) {
          Mask child = pi.restrict(v, x, s);
          if (child.none() || !(child == v || psldim(child, p) >= target - 1)) {
            all_ok = false;
            break;
          }
        }
        if (all_ok) return true;
      }
    return false;
  }

  std::unique_ptr<WitnessNode> build_psl_node(const Mask& v, int p, int depth) {
    auto node = std::make_unique<WitnessNode>();
    if (depth == 0) {
      node->leaf_hypothesis = v.first();
      return node;
    }
    const ProblemInstance& pi = *inst_;
    const auto& fams = minimal_families();
    for (int x = 0; x < pi.num_instances(); ++x) {
      for (const auto& fam : fams) {
        if (static_cast<int>(fam.size()) > p) continue;
        bool all_ok = true;
        for (int s : fam) {
          Mask child = pi.restrict(v, x, s);
          if (child.none() || !(child == v || psldim(child, p) >= depth - 1)) {
            all_ok = false;
            break;
          }
        }
        if (!all_ok) continue;
        node->instance = x;
        std::vector<int> edges(fam);
        while (static_cast<int>(edges.size()) < p) edges.push_back(fam.front());
        for (int s : edges) {
          node->edge_sets.push_back(s);
          node->children.push_back(build_psl_node(pi.restrict(v, x, s), p, depth - 1));
        }
        return node;
      }
    }
    throw ConfigError("psl_witness: internal extraction failure");
  }

  bool ms_reaches(const Mask& v, const Rational& gamma, int target) {
    const ProblemInstance& pi = *inst_;
    for (int x = 0; x < pi.num_instances(); ++x) {
      std::vector<int> coll;
      Mask inter = Mask::full(pi.num_labels());
      for (int s = 0; s < pi.num_sets(); ++s) {
        Mask child = pi.restrict(v, x, s);
        if (child.none()) continue;
        if (child == v || msdim(child, gamma) >= target - 1) {
          coll.push_back(s);
          inter = inter & pi.set_mask(s);
        }
      }
      if (coll.empty()) continue;
      bool unavoidable =
          gamma == 0 ? inter.none() : game(coll).value <= Rational(1) - gamma;
      if (unavoidable) return true;
    }
    return false;
  }

  void enumerate_minimal_families() {
    const ProblemInstance& pi = *inst_;
    long long budget = 5'000'000;
    std::vector<int> chosen;
    std::vector<Mask> privates;
    Mask inter = Mask::full(pi.num_labels());
    enumerate_rec(0, chosen, privates, inter, budget);
    std::sort(minimal_families_.begin(), minimal_families_.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                if (a.size() != b.size()) return a.size() < b.size();
                return a < b;
              });
  }

  // Grows candidate subfamilies in index order. Invariants along a branch:
  // the chosen sets intersect nonempty and each owns a private label found in
  // every other chosen set. Both only shrink as sets are added, so pruning on
  // their death is exhaustive. A family is recorded exactly when the newest
  // set empties the intersection while every private survives: that is
  // inclusion-minimality.
  void enumerate_rec(int start, std::vector<int>& chosen, std::vector<Mask>& privates,
                     const Mask& inter, long long& budget) {
    const ProblemInstance& pi = *inst_;
    for (int s = start; s < pi.num_sets(); ++s) {
      if (--budget <= 0) throw GuardError("minimal families: enumeration budget exceeded");
      const Mask& a = pi.set_mask(s);
      Mask own = inter.and_not(a);
      if (own.none()) continue;
      bool alive = true;
      std::vector<Mask> next_privates;
      next_privates.reserve(privates.size() + 1);
      for (const Mask& pm : privates) {
        Mask np = pm & a;
        if (np.none()) {
          alive = false;
          break;
        }
        next_privates.push_back(np);
      }
      if (!alive) continue;
      next_privates.push_back(own);
      Mask next_inter = inter & a;
      chosen.push_back(s);
      if (next_inter.none())
        minimal_families_.push_back(chosen);
      else
        enumerate_rec(s + 1, chosen, next_privates, next_inter, budget);
      chosen.pop_back();
    }
  }

  std::shared_ptr<const ProblemInstance> inst_;
  std::vector<std::vector<int>> sets_excluding_;
  bool cosingleton_constants_ = false;

  std::unordered_map<Mask, int, MaskHash> sl_memo_, ld_memo_;
  std::map<int, std::unordered_map<Mask, int, MaskHash>> psl_memo_;
  std::map<Rational, std::unordered_map<Mask, int, MaskHash>> ms_memo_;
  std::map<std::vector<int>, GameSolution> game_cache_;
  std::vector<std::vector<int>> minimal_families_;
  bool families_done_ = false;
};

}  // namespace sfl

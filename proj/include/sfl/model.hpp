#pragma once

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfl/errors.hpp"
#include "sfl/mask.hpp"

namespace sfl {

// One online round: the adversary shows instance x, then reveals set s.
struct StreamRound {
  int instance = 0;
  int set = 0;
  bool operator==(const StreamRound&) const = default;
};
using Stream = std::vector<StreamRound>;

// Finite label space, finite set system over it, named instances, and a
// hypothesis table (rows: hypotheses, columns: instances, entries: labels).
// Construction canonicalizes: sets are deduplicated and sorted by their
// membership mask read as a little-endian integer; duplicate hypothesis rows
// keep their first occurrence.
class ProblemInstance {
 public:
  static ProblemInstance create(int num_labels, std::vector<Mask> sets,
                                std::vector<std::string> instance_names,
                                std::vector<std::vector<int>> hypotheses) {
    ProblemInstance inst;
    if (num_labels < 1) throw ParseError("labels: must be at least 1");
    inst.num_labels_ = num_labels;

    if (sets.empty()) throw ParseError("sets: must be nonempty");
    for (size_t j = 0; j < sets.size(); ++j) {
      if (sets[j].size() != num_labels) throw ParseError("sets: width mismatch");
      if (sets[j].none()) throw ParseError("sets[" + std::to_string(j) + "]: empty set");
    }
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    inst.sets_ = std::move(sets);

    if (instance_names.empty()) throw ParseError("instances: must be nonempty");
    inst.instance_names_ = std::move(instance_names);
    int k = static_cast<int>(inst.instance_names_.size());

    if (hypotheses.empty()) throw ParseError("hypotheses: must be nonempty");
    std::vector<std::vector<int>> rows;
    for (size_t i = 0; i < hypotheses.size(); ++i) {
      const auto& row = hypotheses[i];
      if (static_cast<int>(row.size()) != k)
        throw ParseError("hypotheses[" + std::to_string(i) + "]: expected " + std::to_string(k) +
                         " entries, got " + std::to_string(row.size()));
      for (size_t x = 0; x < row.size(); ++x)
        if (row[x] < 0 || row[x] >= num_labels)
          throw ParseError("hypotheses[" + std::to_string(i) + "][" + std::to_string(x) +
                           "]: label " + std::to_string(row[x]) + " out of range [0," +
                           std::to_string(num_labels) + ")");
      if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    }
    inst.hypotheses_ = std::move(rows);

    inst.build_tables();
    return inst;
  }

  int num_labels() const { return num_labels_; }
  int num_sets() const { return static_cast<int>(sets_.size()); }
  int num_instances() const { return static_cast<int>(instance_names_.size()); }
  int num_hypotheses() const { return static_cast<int>(hypotheses_.size()); }

  const Mask& set_mask(int s) const { return sets_.at(s); }
  const std::vector<Mask>& sets() const { return sets_; }
  const std::string& instance_name(int x) const { return instance_names_.at(x); }
  const std::vector<std::string>& instance_names() const { return instance_names_; }
  int label_of(int hypothesis, int instance) const {
    return hypotheses_.at(hypothesis).at(instance);
  }
  const std::vector<std::vector<int>>& hypotheses() const { return hypotheses_; }

  // Hypotheses h with h(x) in set s.
  const Mask& consistent_mask(int x, int s) const { return consistent_.at(x).at(s); }
  // Hypotheses h with h(x) = y.
  const Mask& output_mask(int x, int y) const { return out_.at(x).at(y); }

  Mask full_version_space() const { return Mask::full(num_hypotheses()); }

  // V restricted to hypotheses whose prediction on x lies in set s.
  Mask restrict(const Mask& version, int x, int s) const {
    return version & consistent_mask(x, s);
  }

  // Labels realized by some hypothesis of the version space on x.
  Mask outputs(const Mask& version, int x) const {
    Mask out(num_labels_);
    for (int y = 0; y < num_labels_; ++y)
      if (version.intersects(out_.at(x).at(y))) out.set(y);
    return out;
  }

  // Set indices whose set meets the version space's outputs on x; exactly the
  // sets an adversary can reveal without emptying the version space.
  std::vector<int> consistent_sets(const Mask& version, int x) const {
    std::vector<int> out;
    for (int s = 0; s < num_sets(); ++s)
      if (version.intersects(consistent_mask(x, s))) out.push_back(s);
    return out;
  }

  int find_set(const Mask& m) const {
    for (int s = 0; s < num_sets(); ++s)
      if (sets_[s] == m) return s;
    return -1;
  }

  void check_round(const StreamRound& r, const std::string& where = "round") const {
    if (r.instance < 0 || r.instance >= num_instances())
      throw ParseError(where + ": instance index " + std::to_string(r.instance) + " out of range");
    if (r.set < 0 || r.set >= num_sets())
      throw ParseError(where + ": set index " + std::to_string(r.set) + " out of range");
  }

  bool operator==(const ProblemInstance& o) const {
    return num_labels_ == o.num_labels_ && sets_ == o.sets_ &&
           instance_names_ == o.instance_names_ && hypotheses_ == o.hypotheses_;
  }

 private:
  void build_tables() {
    int k = num_instances(), m = num_labels_, n = num_hypotheses();
    out_.assign(k, std::vector<Mask>(m, Mask(n)));
    for (int h = 0; h < n; ++h)
      for (int x = 0; x < k; ++x) out_[x][hypotheses_[h][x]].set(h);
    consistent_.assign(k, std::vector<Mask>(num_sets(), Mask(n)));
    for (int x = 0; x < k; ++x)
      for (int s = 0; s < num_sets(); ++s) {
        Mask acc(n);
        sets_[s].for_each([&](int y) { acc = acc | out_[x][y]; });
        consistent_[x][s] = acc;
      }
  }

  int num_labels_ = 0;
  std::vector<Mask> sets_;
  std::vector<std::string> instance_names_;
  std::vector<std::vector<int>> hypotheses_;
  std::vector<std::vector<Mask>> out_;
  std::vector<std::vector<Mask>> consistent_;
};

// Smallest-index hypothesis consistent with every revealed round, if any.
inline std::optional<int> validate_realizable(const ProblemInstance& inst, const Stream& stream) {
  Mask v = inst.full_version_space();
  for (size_t t = 0; t < stream.size(); ++t) {
    inst.check_round(stream[t], "stream[" + std::to_string(t) + "]");
    v = inst.restrict(v, stream[t].instance, stream[t].set);
  }
  int h = v.first();
  if (h < 0) return std::nullopt;
  return h;
}

// ---------------------------------------------------------------------------
// Document I/O. Instances and streams travel as JSON text.

inline ProblemInstance parse_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("instance document: invalid syntax: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document: expected an object");
  for (const char* field : {"labels", "sets", "instances", "hypotheses"})
    if (!doc.contains(field))
      throw ParseError(std::string("instance document: missing field '") + field + "'");
  if (!doc["labels"].is_number_integer()) throw ParseError("labels: expected an integer");
  int m = doc["labels"].get<int>();
  if (m < 1) throw ParseError("labels: must be at least 1");

  if (!doc["sets"].is_array()) throw ParseError("sets: expected a list");
  std::vector<Mask> sets;
  for (size_t j = 0; j < doc["sets"].size(); ++j) {
    const auto& js = doc["sets"][j];
    std::string where = "sets[" + std::to_string(j) + "]";
    if (!js.is_array()) throw ParseError(where + ": expected a list of labels");
    Mask mask(m);
    for (const auto& e : js) {
      if (!e.is_number_integer()) throw ParseError(where + ": expected integer labels");
      int y = e.get<int>();
      if (y < 0 || y >= m)
        throw ParseError(where + ": label " + std::to_string(y) + " out of range [0," +
                         std::to_string(m) + ")");
      mask.set(y);
    }
    sets.push_back(mask);
  }

  if (!doc["instances"].is_array()) throw ParseError("instances: expected a list");
  std::vector<std::string> names;
  for (size_t x = 0; x < doc["instances"].size(); ++x) {
    const auto& e = doc["instances"][x];
    if (!e.is_string())
      throw ParseError("instances[" + std::to_string(x) + "]: expected a string");
    names.push_back(e.get<std::string>());
  }

  if (!doc["hypotheses"].is_array()) throw ParseError("hypotheses: expected a list");
  std::vector<std::vector<int>> rows;
  for (size_t i = 0; i < doc["hypotheses"].size(); ++i) {
    const auto& jr = doc["hypotheses"][i];
    std::string where = "hypotheses[" + std::to_string(i) + "]";
    if (!jr.is_array()) throw ParseError(where + ": expected a list of labels");
    std::vector<int> row;
    for (const auto& e : jr) {
      if (!e.is_number_integer()) throw ParseError(where + ": expected integer labels");
      row.push_back(e.get<int>());
    }
    rows.push_back(std::move(row));
  }

  return ProblemInstance::create(m, std::move(sets), std::move(names), std::move(rows));
}

inline std::string serialize_instance(const ProblemInstance& inst) {
  nlohmann::json doc;
  doc["labels"] = inst.num_labels();
  nlohmann::json sets = nlohmann::json::array();
  for (int s = 0; s < inst.num_sets(); ++s) sets.push_back(inst.set_mask(s).to_indices());
  doc["sets"] = std::move(sets);
  doc["instances"] = inst.instance_names();
  doc["hypotheses"] = inst.hypotheses();
  return doc.dump(2) + "\n";
}

inline Stream parse_stream(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("stream document: invalid syntax: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("stream document: expected a list of [instance,set] pairs");
  Stream out;
  for (size_t t = 0; t < doc.size(); ++t) {
    const auto& e = doc[t];
    std::string where = "stream[" + std::to_string(t) + "]";
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ParseError(where + ": expected an [instance,set] integer pair");
    out.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return out;
}

inline std::string serialize_stream(const Stream& stream) {
  nlohmann::json doc = nlohmann::json::array();
  for (const StreamRound& r : stream) doc.push_back({r.instance, r.set});
  return doc.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Built-in families.

namespace detail {

inline std::vector<std::vector<int>> constant_rows(int num_labels, int num_instances) {
  std::vector<std::vector<int>> rows;
  for (int y = 0; y < num_labels; ++y) rows.emplace_back(num_instances, y);
  return rows;
}

inline std::vector<std::string> default_names(int k) {
  std::vector<std::string> names;
  for (int x = 0; x < k; ++x) names.push_back("x" + std::to_string(x));
  return names;
}

}  // namespace detail

// All rank vectors of K items in lexicographic order; a rank vector gives
// each item its position, 1 = ranked first. The label of a permutation is
// its index in this enumeration.
inline std::vector<std::vector<int>> all_rank_vectors(int K) {
  std::vector<int> base(K);
  std::iota(base.begin(), base.end(), 1);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

inline int rank_vector_label(const std::vector<std::vector<int>>& enumeration,
                             const std::vector<int>& pi) {
  auto it = std::find(enumeration.begin(), enumeration.end(), pi);
  if (it == enumeration.end()) throw ConfigError("rank vector: not a permutation of 1..K");
  return static_cast<int>(it - enumeration.begin());
}

// 1 when some less-relevant item is ranked strictly better than a
// more-relevant one, else 0.
inline int ranking_loss(const std::vector<int>& pi, const std::vector<int>& relevance) {
  if (pi.size() != relevance.size()) throw ConfigError("ranking_loss: size mismatch");
  int K = static_cast<int>(pi.size());
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      if (relevance[i] < relevance[j] && pi[i] < pi[j]) return 1;
  return 0;
}

// Feedback sets for ranking: for relevance bitstring r, the permutations
// placing every relevant item within the top |r| positions. Zero-loss
// permutations exactly.
inline ProblemInstance gen_ranking_instance(
    int K, const std::vector<std::vector<int>>& hypothesis_rows = {}) {
  if (K < 2 || K > 5) throw ConfigError("ranking: K out of range [2,5]");
  auto perms = all_rank_vectors(K);
  int m = static_cast<int>(perms.size());
  std::vector<Mask> sets;
  for (int rbits = 0; rbits < (1 << K); ++rbits) {
    std::vector<int> r(K);
    int cnt = 0;
    for (int i = 0; i < K; ++i) {
      r[i] = (rbits >> i) & 1;
      cnt += r[i];
    }
    Mask mask(m);
    for (int label = 0; label < m; ++label) {
      bool ok = true;
      for (int i = 0; i < K && ok; ++i)
        if (r[i] == 1 && perms[label][i] > cnt) ok = false;
      if (ok) mask.set(label);
    }
    sets.push_back(mask);
  }
  auto rows = hypothesis_rows.empty() ? detail::constant_rows(m, 1) : hypothesis_rows;
  int k = static_cast<int>(rows.front().size());
  return ProblemInstance::create(m, std::move(sets), detail::default_names(k), rows);
}

// All contiguous intervals [a,b] over grid points 0..G-1.
inline ProblemInstance gen_interval_instance(
    int G, const std::vector<std::vector<int>>& hypothesis_rows = {}) {
  if (G < 2 || G > 256) throw ConfigError("interval: G out of range [2,256]");
  std::vector<Mask> sets;
  for (int a = 0; a < G; ++a)
    for (int b = a; b < G; ++b) {
      Mask mask(G);
      for (int y = a; y <= b; ++y) mask.set(y);
      sets.push_back(mask);
    }
  auto rows = hypothesis_rows.empty() ? detail::constant_rows(G, 1) : hypothesis_rows;
  int k = static_cast<int>(rows.front().size());
  return ProblemInstance::create(G, std::move(sets), detail::default_names(k), rows);
}

inline int hamming_distance(int a, int b) { return std::popcount(static_cast<unsigned>(a ^ b)); }

// Labels are bitstrings of length K (label index read little-endian); the
// feedback sets are all Hamming balls of radius q.
inline ProblemInstance gen_hamming_instance(
    int K, int q, const std::vector<std::vector<int>>& hypothesis_rows = {}) {
  if (K < 2 || K > 6) throw ConfigError("hamming: K out of range [2,6]");
  if (q < 1 || q > K - 1) throw ConfigError("hamming: q out of range [1,K-1]");
  int m = 1 << K;
  std::vector<Mask> sets;
  for (int center = 0; center < m; ++center) {
    Mask mask(m);
    for (int y = 0; y < m; ++y)
      if (hamming_distance(center, y) <= q) mask.set(y);
    sets.push_back(mask);
  }
  auto rows = hypothesis_rows.empty() ? detail::constant_rows(m, 1) : hypothesis_rows;
  int k = static_cast<int>(rows.front().size());
  return ProblemInstance::create(m, std::move(sets), detail::default_names(k), rows);
}

// Feedback sets are the singletons {y}: full-information multiclass.
inline ProblemInstance gen_singleton_instance(
    int m, const std::vector<std::vector<int>>& hypothesis_rows = {}) {
  if (m < 1 || m > 4096) throw ConfigError("singleton: m out of range [1,4096]");
  std::vector<Mask> sets;
  for (int y = 0; y < m; ++y) {
    Mask mask(m);
    mask.set(y);
    sets.push_back(mask);
  }
  auto rows = hypothesis_rows.empty() ? detail::constant_rows(m, 1) : hypothesis_rows;
  int k = static_cast<int>(rows.front().size());
  return ProblemInstance::create(m, std::move(sets), detail::default_names(k), rows);
}

// Feedback sets are the complements of singletons: the revealed set names one
// excluded label, bandit-style.
inline ProblemInstance gen_cosingleton_instance(
    int M, const std::vector<std::vector<int>>& hypothesis_rows = {}) {
  if (M < 2 || M > 4096) throw ConfigError("cosingleton: M out of range [2,4096]");
  std::vector<Mask> sets;
  for (int y = 0; y < M; ++y) {
    Mask mask = Mask::full(M);
    mask.reset(y);
    sets.push_back(mask);
  }
  auto rows = hypothesis_rows.empty() ? detail::constant_rows(M, 1) : hypothesis_rows;
  int k = static_cast<int>(rows.front().size());
  return ProblemInstance::create(M, std::move(sets), detail::default_names(k), rows);
}

// Six labels, three tripleton sets, three constant hypotheses. The smallest
// system whose randomized and adversary-mixture game values separate, and the
// standard worked example throughout the tests.
inline ProblemInstance example3_instance() {
  std::vector<Mask> sets;
  for (auto idx : {std::vector<int>{0, 3, 4}, std::vector<int>{1, 4, 5}, std::vector<int>{2, 3, 5}}) {
    Mask mask(6);
    for (int y : idx) mask.set(y);
    sets.push_back(mask);
  }
  return ProblemInstance::create(6, std::move(sets), {"x0"},
                                 {{0}, {1}, {2}});
}

// True when the set system and hypothesis table match example3_instance().
inline bool is_example3(const ProblemInstance& inst) {
  static const ProblemInstance ref = example3_instance();
  return inst.num_labels() == ref.num_labels() && inst.sets() == ref.sets() &&
         inst.hypotheses() == ref.hypotheses();
}

}  // namespace sfl

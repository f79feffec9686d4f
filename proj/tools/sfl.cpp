// Command-line front end: instance generators, dimension queries, single game
// runs with CSV transcripts, repeated-trial summaries, verification suites.
//
// Exit codes: 0 success, 1 failed check or guard, 2 usage or parse error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfl/adversaries.hpp"
#include "sfl/dims.hpp"
#include "sfl/harness.hpp"
#include "sfl/learners.hpp"
#include "sfl/model.hpp"
#include "sfl/verify.hpp"

namespace {

using namespace sfl;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int spec_int(const std::string& spec, const std::string& field) {
  try {
    size_t pos = 0;
    int v = std::stoi(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("instance spec '" + spec + "': bad integer '" + field + "'");
  }
}

// Either a JSON document on disk or a built-in generator spec:
//   example3 | singleton:m | cosingleton:M | ranking:K | interval:G | hamming:K:q
ProblemInstance load_instance(const std::string& spec) {
  if (std::filesystem::exists(spec)) return parse_instance(read_file(spec));
  auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  auto want = [&](size_t n) {
    if (parts.size() != n + 1)
      throw ParseError("instance spec '" + spec + "': expected " + std::to_string(n) +
                       " parameter(s) for " + kind);
  };
  if (kind == "example3") {
    want(0);
    return example3_instance();
  }
  if (kind == "singleton") {
    want(1);
    return gen_singleton_instance(spec_int(spec, parts[1]));
  }
  if (kind == "cosingleton") {
    want(1);
    return gen_cosingleton_instance(spec_int(spec, parts[1]));
  }
  if (kind == "ranking") {
    want(1);
    return gen_ranking_instance(spec_int(spec, parts[1]));
  }
  if (kind == "interval") {
    want(1);
    return gen_interval_instance(spec_int(spec, parts[1]));
  }
  if (kind == "hamming") {
    want(2);
    return gen_hamming_instance(spec_int(spec, parts[1]), spec_int(spec, parts[2]));
  }
  throw ParseError("instance: no such file or builtin spec: " + spec);
}

std::string mask_members(const Mask& m) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  m.for_each([&](int y) {
    if (!first) os << ",";
    os << y;
    first = false;
  });
  os << "}";
  return os.str();
}

void print_witness_node(std::ostream& os, const ProblemInstance& inst, const WitnessNode* node,
                        int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  if (node->is_leaf()) {
    os << pad << "leaf hypothesis=" << node->leaf_hypothesis << "\n";
    return;
  }
  os << pad << "node instance=" << inst.instance_name(node->instance) << "\n";
  for (size_t e = 0; e < node->edge_sets.size(); ++e) {
    int s = node->edge_sets[e];
    os << pad << "  edge[" << e << "] set=" << s << " " << mask_members(inst.set_mask(s))
       << "\n";
    print_witness_node(os, inst, node->children[e].get(), indent + 2);
  }
}

void print_witness(std::ostream& os, const ProblemInstance& inst, const WitnessTree& w) {
  os << "witness kind="
     << (w.kind == WitnessTree::Kind::Labelwise ? std::string("labelwise")
                                                : "branching p=" + std::to_string(w.p))
     << " depth=" << w.depth << "\n";
  if (w.root) print_witness_node(os, inst, w.root.get(), 1);
}

struct PlayConfig {
  std::string instance_spec;
  std::string learner = "soa";
  std::string adversary = "scripted";
  std::string epsilon = "1/3";
  std::string gamma = "1/3";
  int scales = 2;
  int constant_label = 0;
  int horizon = 0;
  int rounds = 0;
  int block_k = 25;
  std::string mode = "exact";
  std::string stream_path;
  std::string out_path;
  uint64_t seed = 0;
  bool reset_on_empty = false;
};

void add_play_flags(CLI::App* cmd, PlayConfig& cfg, uint64_t seed_default) {
  cfg.seed = seed_default;
  cmd->add_option("--instance", cfg.instance_spec,
                  "instance document path or builtin spec (example3, singleton:m, "
                  "cosingleton:M, ranking:K, interval:G, hamming:K:q)")
      ->required();
  cmd->add_option("--learner", cfg.learner,
                  "soa|rsoa|msol|agnostic|uniform|constant|example3");
  cmd->add_option("--adversary", cfg.adversary,
                  "tree|ms|khinchine|separation|scripted|iid");
  cmd->add_option("--rounds", cfg.rounds, "horizon (round cap)")->required();
  cmd->add_option("--mode", cfg.mode, "exact|sample");
  cmd->add_option("--seed", cfg.seed, "rng seed (default: SFL_SEED env or 0)");
  cmd->add_option("--epsilon", cfg.epsilon, "learner scale, rational a/b");
  cmd->add_option("--gamma", cfg.gamma, "adaptive adversary scale, rational a/b");
  cmd->add_option("--scales", cfg.scales, "number of scales for msol");
  cmd->add_option("--label", cfg.constant_label, "label for the constant learner");
  cmd->add_option("--horizon", cfg.horizon,
                  "agnostic planning horizon (default: --rounds)");
  cmd->add_option("--block-k", cfg.block_k, "sign-flip block length (odd)");
  cmd->add_option("--stream", cfg.stream_path, "stream document for scripted/iid");
  cmd->add_flag("--reset-on-empty", cfg.reset_on_empty,
                "restart realizable learners instead of failing on contradictory feedback");
}

struct GameSetup {
  std::shared_ptr<const ProblemInstance> inst;
  std::shared_ptr<DimensionEngine> eng;
  std::unique_ptr<Learner> learner;
  std::unique_ptr<Adversary> adversary;
  RunMode mode = RunMode::Exact;
};

// trial_index shifts the seeds so bench trials stay independent
GameSetup build_game(const PlayConfig& cfg, uint64_t trial_seed) {
  GameSetup g;
  g.inst = std::make_shared<const ProblemInstance>(load_instance(cfg.instance_spec));
  g.eng = std::make_shared<DimensionEngine>(g.inst);
  if (cfg.mode == "exact")
    g.mode = RunMode::Exact;
  else if (cfg.mode == "sample")
    g.mode = RunMode::Sampled;
  else
    throw ParseError("mode: expected exact|sample, got " + cfg.mode);

  LearnerOptions opt;
  opt.epsilon = parse_rational(cfg.epsilon);
  opt.scales = cfg.scales;
  opt.constant_label = cfg.constant_label;
  opt.horizon = cfg.horizon > 0 ? cfg.horizon : cfg.rounds;
  opt.sample_mode = g.mode == RunMode::Sampled;
  opt.seed = detail::mix_seed(trial_seed, 1);
  opt.reset_on_empty = cfg.reset_on_empty;
  g.learner = make_learner(cfg.learner, g.eng, opt);

  if (cfg.adversary == "tree") {
    g.adversary = std::make_unique<TreeAdversary>(g.inst, g.eng->sl_witness());
  } else if (cfg.adversary == "ms") {
    g.adversary = std::make_unique<MsAdaptiveAdversary>(g.eng, parse_rational(cfg.gamma));
  } else if (cfg.adversary == "khinchine") {
    g.adversary = std::make_unique<KhinchineAdversary>(
        g.inst, g.eng->psl_witness(2), cfg.block_k, detail::mix_seed(trial_seed, 2));
  } else if (cfg.adversary == "separation") {
    g.adversary = std::make_unique<SeparationAdversary>(g.inst);
  } else if (cfg.adversary == "scripted") {
    if (cfg.stream_path.empty()) throw ParseError("scripted adversary needs --stream");
    Stream st = parse_stream(read_file(cfg.stream_path));
    bool realizable = validate_realizable(*g.inst, st).has_value();
    g.adversary = std::make_unique<ScriptedAdversary>(g.inst, std::move(st), realizable);
  } else if (cfg.adversary == "iid") {
    if (cfg.stream_path.empty()) throw ParseError("iid adversary needs --stream");
    Stream st = parse_stream(read_file(cfg.stream_path));
    std::vector<IidAdversary::WeightedRound> menu;
    for (const StreamRound& r : st) menu.push_back({r.instance, r.set, 1});
    g.adversary =
        std::make_unique<IidAdversary>(g.inst, std::move(menu), detail::mix_seed(trial_seed, 3));
  } else {
    throw ParseError("adversary: expected tree|ms|khinchine|separation|scripted|iid, got " +
                     cfg.adversary);
  }
  return g;
}

int cmd_gen(const std::string& kind, int K, int q, int M, int G, const std::string& out) {
  ProblemInstance inst = [&] {
    if (kind == "ranking") return gen_ranking_instance(K);
    if (kind == "interval") return gen_interval_instance(G);
    if (kind == "hamming") return gen_hamming_instance(K, q);
    if (kind == "singleton") return gen_singleton_instance(M);
    if (kind == "cosingleton") return gen_cosingleton_instance(M);
    if (kind == "example3") return example3_instance();
    throw ParseError("gen: unknown kind " + kind);
  }();
  std::string text = serialize_instance(inst);
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return 0;
}

int cmd_dims(const std::string& spec, const std::vector<std::string>& gammas,
             std::vector<int> ps, bool helly_only, bool show_witness, int witness_p) {
  auto inst = std::make_shared<const ProblemInstance>(load_instance(spec));
  DimensionEngine eng(inst);
  if (helly_only) {
    HellyResult h = eng.helly_number();
    if (h.vacuous)
      std::cout << "Helly=vacuous\n";
    else
      std::cout << "Helly=" << h.value << "\n";
    return 0;
  }
  std::ostringstream line;
  line << "Ldim=" << eng.ldim() << ", SL=" << eng.sldim();
  for (int p : ps) line << ", SL_" << p << "=" << eng.psldim(p);
  for (const std::string& gs : gammas) {
    Rational g = parse_rational(gs);
    line << ", MS_{" << format_rational(g) << "}=" << eng.msdim(g);
  }
  HellyResult h = eng.helly_number();
  line << ", Helly=";
  if (h.vacuous)
    line << "vacuous";
  else
    line << h.value;
  std::cout << line.str() << "\n";
  if (show_witness) {
    if (witness_p >= 2)
      print_witness(std::cout, *inst, eng.psl_witness(witness_p));
    else
      print_witness(std::cout, *inst, eng.sl_witness());
  }
  return 0;
}

int cmd_play(const PlayConfig& cfg) {
  GameSetup g = build_game(cfg, cfg.seed);
  GameTranscript tr =
      run_game(*g.inst, *g.learner, *g.adversary, cfg.rounds, g.mode, cfg.seed);
  std::string csv = csv_string(tr, *g.inst);
  if (cfg.out_path.empty()) {
    std::cout << csv;
  } else {
    write_file(cfg.out_path, csv);
    std::cout << "rounds=" << tr.rounds.size() << " expected="
              << format_rational(tr.cumulative_expected) << " sampled=" << tr.cumulative_sampled
              << " comparator=" << tr.comparator_loss
              << " regret=" << format_rational(tr.regret) << "\n";
  }
  return 0;
}

int cmd_bench(const PlayConfig& cfg, int trials) {
  // one independent game per trial; the statistic is the per-trial regret
  TrialSummary sum = monte_carlo(trials, cfg.seed, [&](uint64_t trial_seed) {
    GameSetup g = build_game(cfg, trial_seed);
    GameTranscript tr =
        run_game(*g.inst, *g.learner, *g.adversary, cfg.rounds, g.mode, trial_seed);
    return tr.regret;
  });
  std::cout << "trials=" << sum.trials << " mean=" << format_rational(sum.mean) << " (~"
            << to_double(sum.mean) << ") variance=" << format_rational(sum.variance)
            << " se=" << sum.se() << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& max_size) {
  bool tiny = max_size == "tiny" || max_size == "small";
  if (!max_size.empty() && max_size != "tiny" && max_size != "small" && max_size != "full")
    throw ParseError("verify: --max-size expects tiny|small|full");
  auto scaled = [&](const std::string& name) -> std::vector<CheckResult> {
    if (!tiny) return run_suite(name);
    if (name == "structural")
      return {check_structural_sandwich(20), check_helly_collapse(20),
              check_singleton_reduction(5)};
    if (name == "minimax") return {check_deterministic_optimality(), check_minimax(5)};
    if (name == "khinchine") return {check_khinchine(500)};
    return run_suite(name);
  };
  std::vector<CheckResult> results;
  if (suite == "all") {
    for (const std::string& s : suite_names()) {
      auto part = scaled(s);
      results.insert(results.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
    }
  } else {
    results = scaled(suite);
  }
  bool all_pass = true;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.details << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "OK" : "FAILED") << " (" << results.size() << " checks)\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  uint64_t seed_default = 0;
  if (const char* env = std::getenv("SFL_SEED")) {
    char* end = nullptr;
    seed_default = std::strtoull(env, &end, 10);
    if (end == env) seed_default = 0;
  }

  CLI::App app{"exact lab for online set-valued-feedback games"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "emit an instance document");
  std::string gen_kind;
  int gen_K = 3, gen_q = 1, gen_M = 2, gen_G = 4;
  std::string gen_out;
  gen->add_option("kind", gen_kind,
                  "ranking|interval|hamming|singleton|cosingleton|example3")
      ->required();
  gen->add_option("--K", gen_K, "items (ranking) or cube dimension (hamming)");
  gen->add_option("--q", gen_q, "ball radius (hamming)");
  gen->add_option("--M", gen_M, "label count (singleton/cosingleton)");
  gen->add_option("--G", gen_G, "grid size (interval)");
  gen->add_option("--out", gen_out, "output path (default stdout)");

  // dims
  auto* dims = app.add_subcommand("dims", "print exact dimensions of an instance");
  std::string dims_spec;
  std::vector<std::string> dims_gammas;
  std::vector<int> dims_ps{2, 3};
  bool dims_helly_only = false, dims_witness = false;
  int dims_witness_p = 0;
  dims->add_option("--instance", dims_spec, "instance document path or builtin spec")
      ->required();
  dims->add_option("--gamma", dims_gammas, "scale a/b for the measure dimension (repeatable)");
  dims->add_option("--p", dims_ps, "branching arities (repeatable, default 2 3)");
  dims->add_flag("--helly", dims_helly_only, "print only the Helly number");
  dims->add_flag("--witness", dims_witness, "also print a shattering witness tree");
  dims->add_option("--witness-p", dims_witness_p,
                   "print the branching witness at this arity instead of the labelwise one");

  // play
  auto* play = app.add_subcommand("play", "run one game and emit a CSV transcript");
  PlayConfig play_cfg;
  add_play_flags(play, play_cfg, seed_default);
  play->add_option("--out", play_cfg.out_path, "CSV path (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "repeat a game and summarize the regret");
  PlayConfig bench_cfg;
  int bench_trials = 100;
  add_play_flags(bench, bench_cfg, seed_default);
  bench->add_option("--trials", bench_trials, "number of independent trials");

  // verify
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string verify_suite = "all";
  std::string verify_size = "full";
  verify->add_option("suite", verify_suite,
                     "structural|helly|minimax|eq1|potential|khinchine|example3|separation|all");
  verify->add_option("--max-size", verify_size, "tiny|small|full (default full)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_kind, gen_K, gen_q, gen_M, gen_G, gen_out);
    if (dims->parsed())
      return cmd_dims(dims_spec, dims_gammas, dims_ps, dims_helly_only, dims_witness,
                      dims_witness_p);
    if (play->parsed()) return cmd_play(play_cfg);
    if (bench->parsed()) return cmd_bench(bench_cfg, bench_trials);
    if (verify->parsed()) return cmd_verify(verify_suite, verify_size);
  } catch (const sfl::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sfl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sfl::GuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const sfl::RealizabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

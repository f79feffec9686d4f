#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#ifdef _WIN32
#error "the cli smoke tests drive the binary through popen"
#endif

namespace {

struct RunResult {
  int code;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(SFL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "sfl_cli_smoke";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  REQUIRE(out.good());
  out << text;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli help exits cleanly and lists the subcommands") {
  RunResult r = run_cli("--help");
  REQUIRE(r.code == 0);
  for (const char* sub : {"gen", "dims", "play", "bench", "verify"})
    REQUIRE(contains(r.output, sub));
}

TEST_CASE("cli prints the full dimension line for the showcase system") {
  RunResult r = run_cli("dims --instance example3 --gamma 1/3");
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.output, "Ldim=1, SL=1, SL_2=0, SL_3=1, MS_{1/3}=1, Helly=3"));

  RunResult h = run_cli("dims --instance example3 --helly");
  REQUIRE(h.code == 0);
  REQUIRE(contains(h.output, "Helly=3"));
  REQUIRE_FALSE(contains(h.output, "Ldim"));

  RunResult w = run_cli("dims --instance example3 --witness");
  REQUIRE(w.code == 0);
  REQUIRE(contains(w.output, "witness kind=labelwise depth=1"));
  REQUIRE(contains(w.output, "node instance=x0"));
}

TEST_CASE("cli generates documents that round-trip through dims") {
  auto path = temp_file("gen_roundtrip.json");
  RunResult g = run_cli("gen example3 --out " + path.string());
  REQUIRE(g.code == 0);
  RunResult d = run_cli("dims --instance " + path.string() + " --gamma 1/3");
  REQUIRE(d.code == 0);
  REQUIRE(contains(d.output, "Ldim=1, SL=1, SL_2=0, SL_3=1, MS_{1/3}=1, Helly=3"));

  RunResult bad = run_cli("gen mystery");
  REQUIRE(bad.code == 2);
}

TEST_CASE("cli play emits identical bytes for identical seeds") {
  std::string args =
      "play --instance singleton:2 --learner rsoa --adversary khinchine "
      "--rounds 15 --block-k 5 --mode sample --seed 7 --reset-on-empty";
  RunResult a = run_cli(args);
  RunResult b = run_cli(args);
  REQUIRE(a.code == 0);
  REQUIRE(a.output == b.output);
  REQUIRE(contains(a.output, "round,instance,prediction,set,sampled_loss"));

  RunResult c = run_cli(
      "play --instance singleton:2 --learner rsoa --adversary khinchine "
      "--rounds 15 --block-k 5 --mode sample --seed 8 --reset-on-empty");
  REQUIRE(c.code == 0);
  REQUIRE(c.output != a.output);
}

TEST_CASE("cli play writes csv to a file and a one-line summary to stdout") {
  auto ipath = temp_file("ex3.json");
  RunResult g = run_cli("gen example3 --out " + ipath.string());
  REQUIRE(g.code == 0);

  auto spath = temp_file("const_stream.json");
  write_file(spath, "[[0,0],[0,0],[0,0]]\n");
  auto opath = temp_file("play_out.csv");
  RunResult r = run_cli("play --instance " + ipath.string() + " --learner soa " +
                        "--adversary scripted --stream " + spath.string() +
                        " --rounds 3 --out " + opath.string());
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.output, "rounds=3"));
  REQUIRE(contains(r.output, "regret="));
  std::ifstream in(opath);
  std::string first;
  std::getline(in, first);
  REQUIRE(first == std::string("round,instance,prediction,set,sampled_loss,") +
                       "expected_loss_num,expected_loss_den,cum_expected,comparator," +
                       "regret_num,regret_den");
}

TEST_CASE("cli signals stream and configuration failures by exit code") {
  auto spath = temp_file("dead_stream.json");
  write_file(spath, "[[0,0],[0,1]]\n");
  RunResult r = run_cli("play --instance example3 --learner soa --adversary scripted "
                        "--stream " + spath.string() + " --rounds 2");
  REQUIRE(r.code == 1);
  REQUIRE(contains(r.output, "error:"));

  REQUIRE(run_cli("play --instance example3 --learner nope --adversary scripted "
                  "--rounds 1")
              .code == 2);
  REQUIRE(run_cli("play --frobnicate").code == 2);
  REQUIRE(run_cli("dims --instance no_such_file.json").code == 2);
}

TEST_CASE("cli bench reports exact mean and spread for a seeded batch") {
  auto mpath = temp_file("iid_menu.json");
  write_file(mpath, "[[0,0],[0,1],[0,2]]\n");
  std::string args = "bench --instance example3 --learner rsoa --adversary iid "
                     "--stream " + mpath.string() +
                     " --rounds 4 --trials 8 --seed 3 --reset-on-empty";
  RunResult r = run_cli(args);
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.output, "trials=8"));
  REQUIRE(contains(r.output, "mean="));
  REQUIRE(contains(r.output, "se="));
  RunResult again = run_cli(args);
  REQUIRE(again.output == r.output);
}

TEST_CASE("cli verify runs a named suite and reports per-check lines") {
  RunResult r = run_cli("verify separation");
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.output, "[PASS] separation-demo"));
  REQUIRE(contains(r.output, "OK (1 checks)"));

  REQUIRE(run_cli("verify no_such_suite").code == 2);
  REQUIRE(run_cli("verify separation --max-size enormous").code == 2);
}

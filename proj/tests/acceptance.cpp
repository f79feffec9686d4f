// Runs every check in the verification catalog at full scale and prints one
// line per check. Exits nonzero when any check fails.

#include <cstdio>
#include <exception>
#include <vector>

#include "sfl/verify.hpp"

int main() {
  std::vector<sfl::CheckResult> results;
  try {
    results = sfl::run_all_checks();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: verification aborted: %s\n", e.what());
    return 2;
  }
  int failures = 0;
  for (const sfl::CheckResult& r : results) {
    std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.details.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}

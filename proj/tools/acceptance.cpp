// Acceptance runner: one pass/fail line per criterion, exit 0 iff all pass.
//   ergclt_acceptance [--grid N] [--seed S] [--only a,b]
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  ergclt::AcceptanceOptions opts;
  std::vector<std::string> only;
  CLI::App app{"acceptance criteria"};
  app.add_option("--grid", opts.grid)->capture_default_str();
  app.add_option("--seed", opts.seed)->capture_default_str();
  app.add_option("--only", only)->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const auto& names = ergclt::criterion_names();
  for (const auto& o : only) {
    bool known = false;
    for (const auto& n : names) known = known || n == o;
    if (!known) {
      std::fprintf(stderr, "unknown criterion '%s'\n", o.c_str());
      return 2;
    }
  }

  int failed = 0;
  ergclt::run_acceptance(opts, only, [&](const ergclt::CriterionResult& c) {
    std::printf("%s  AC%-2d %-17s %s  [%.1fs]\n", c.passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.summary.c_str(), c.seconds);
    std::fflush(stdout);
    failed += !c.passed;
  });
  std::printf("%d failed\n", failed);
  return failed ? 1 : 0;
}

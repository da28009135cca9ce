// Command-line front end over the C API.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergclt/ergclt.h"

namespace {

enum Exit { kPass = 0, kCriterion = 1, kUsage = 2, kNumerical = 3 };

int exit_code(ergclt_status s) {
  switch (s) {
    case ERGCLT_OK: return kPass;
    case ERGCLT_CRITERION_FAILED: return kCriterion;
    case ERGCLT_INVALID_ARGUMENT:
    case ERGCLT_DOMAIN:
    case ERGCLT_PRECONDITION: return kUsage;
    default: return kNumerical;
  }
}

struct Owned {
  char* p = nullptr;
  ~Owned() { ergclt_string_free(p); }
};

// One line per criterion on stderr, so stdout stays machine-readable.
void print_criteria(const std::string& report) {
  const auto j = nlohmann::json::parse(report, nullptr, false);
  if (j.is_discarded() || !j.contains("criteria")) return;
  for (const auto& c : j["criteria"]) {
    std::fprintf(stderr, "[%s] %2d %-17s %s\n", c["passed"].get<bool>() ? "PASS" : "FAIL",
                 c["id"].get<int>(), c["name"].get<std::string>().c_str(),
                 c["summary"].get<std::string>().c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  ergclt_run_config cfg;
  ergclt_run_config_init(&cfg);
  std::string map = cfg.map, out, format = cfg.format, only;

  CLI::App app{"Transfer operators, invariant densities and CLT variances for interval maps"};
  app.set_config("--config", "", "key=value file; flags given on the command line win");
  app.add_option("--map", map, "tent or three-branch")->capture_default_str();
  app.add_option("--a", cfg.a, "tent parameter in (1, 2]")->capture_default_str();
  app.add_option("--grid", cfg.grid_n, "Ulam cells")->capture_default_str();
  app.add_option("--steps", cfg.steps_n, "partial-sum length n")->capture_default_str();
  app.add_option("--paths", cfg.paths, "Monte Carlo paths")->capture_default_str();
  app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  app.add_option("--trunc", cfg.truncation_J, "series truncation")->capture_default_str();
  app.add_option("--out", out, "write <out>.json and <out>.csv");
  app.add_option("--format", format, "stdout format, csv or json")->capture_default_str();
  app.add_option("--only", only, "comma separated criterion names (verify)");
  app.require_subcommand(1);

  auto* density = app.add_subcommand("density", "invariant density and period detection");
  auto* variance = app.add_subcommand("variance", "limiting variance by every applicable method");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo partial-sum paths and goodness of fit");
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  for (auto* s : {density, variance, simulate, verify}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  cfg.map = map.c_str();
  cfg.output_path = out.empty() ? nullptr : out.c_str();
  cfg.format = format.c_str();
  cfg.only = only.empty() ? nullptr : only.c_str();

  Owned report, csv;
  ergclt_status s;
  if (*density) {
    s = ergclt_cmd_density(&cfg, &report.p, &csv.p);
  } else if (*variance) {
    s = ergclt_cmd_variance(&cfg, &report.p, &csv.p);
  } else if (*simulate) {
    s = ergclt_cmd_simulate(&cfg, &report.p, &csv.p);
  } else {
    s = ergclt_cmd_verify(&cfg, &report.p, &csv.p);
  }

  if (s != ERGCLT_OK && s != ERGCLT_CRITERION_FAILED) {
    std::fprintf(stderr, "ergclt: %s: %s\n", ergclt_status_string(s), ergclt_last_error());
    return exit_code(s);
  }
  if (*verify && report.p) print_criteria(report.p);
  if (format == "csv" && csv.p && *csv.p) {
    std::fputs(csv.p, stdout);
  } else if (report.p) {
    std::fputs(report.p, stdout);
    std::fputc('\n', stdout);
  }
  return exit_code(s);
}

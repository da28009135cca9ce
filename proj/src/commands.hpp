#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "report_io.hpp"

namespace ergclt {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct RunConfig {
  std::string map = "tent";  // tent | three-branch
  double a = 2.0;
  std::size_t grid_n = kDefaultGrid;
  std::size_t steps_n = kDefaultSteps;
  std::size_t paths = kDefaultPaths;
  std::uint64_t seed = kDefaultSeed;
  std::size_t truncation_J = kDefaultLags;
  std::string output_path;  // empty: nothing written
  std::string format = "json";
  std::vector<std::string> only;

  bool is_tent() const { return map == "tent"; }
  /// Throws ConfigError on out-of-range fields.
  void validate() const;
  json to_json() const;
};

/// Report plus the tabular data the command produced (CSV, may be empty).
struct CommandOutput {
  json report;
  std::string data_csv;
  bool passed = true;  // verify only
};

/// Each command validates the config, computes, writes <out>.csv and
/// <out>.json when an output path is set, and returns the same content.
CommandOutput cmd_density(const RunConfig& cfg);
CommandOutput cmd_variance(const RunConfig& cfg);
CommandOutput cmd_simulate(const RunConfig& cfg);
CommandOutput cmd_verify(const RunConfig& cfg);

}  // namespace ergclt

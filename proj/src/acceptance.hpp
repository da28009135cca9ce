#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ergclt {

struct AcceptanceOptions {
  std::size_t grid = 4096;
  std::uint64_t seed = 20240601;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;     // one line, measured values against tolerances
  nlohmann::json measured;
  double seconds = 0.0;
};

/// Criterion names in order; `--only` filters by these.
const std::vector<std::string>& criterion_names();

/// Runs the criteria named in `only` (all when empty).  Computation errors
/// inside a criterion are caught and reported as a failure of that criterion.
/// `on_done` sees each result as soon as it is available.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opts, const std::vector<std::string>& only = {},
    const std::function<void(const CriterionResult&)>& on_done = {});

}  // namespace ergclt

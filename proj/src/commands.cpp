#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "acceptance.hpp"
#include "errors.hpp"

namespace ergclt {

namespace {

const std::vector<double> kTimeGrid{0.0, 0.25, 0.5, 1.0};

json header(const char* command, const RunConfig& cfg) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"config", cfg.to_json()}};
}

void emit(const RunConfig& cfg, const CommandOutput& out) {
  if (cfg.output_path.empty()) return;
  write_atomic(cfg.output_path + ".json", out.report.dump(2) + "\n");
  if (!out.data_csv.empty()) write_atomic(cfg.output_path + ".csv", out.data_csv);
}

PiecewiseLinearMap make_map(const RunConfig& cfg) {
  return cfg.is_tent() ? tent_map(cfg.a) : three_branch_example();
}

// Three-branch observable: 1, -1, -2, 2 on the quarters of [0, 1].
PAF three_branch_h() {
  const std::vector<double> v{1.0, -1.0, -2.0, 2.0};
  return PAF::step({0.0, 0.25, 0.5, 0.75, 1.0}, v);
}

PAF lebesgue01() { return PAF::constant(Interval(0.0, 1.0), 1.0); }

std::vector<ComponentSpec> three_branch_components() {
  return {{{Interval(0.0, 0.5)}, Interval(0.0, 0.5), 1},
          {{Interval(0.5, 1.0)}, Interval(0.5, 1.0), 1}};
}

// One row per Ulam cell, including cells where the density vanishes.
std::string grid_csv(const UlamOperator& op, const PAF& density) {
  std::string out = "cell_lo,cell_hi,value\n";
  for (std::size_t k = 0; k < op.grid_n(); ++k) {
    const double lo = op.cell_lo(k), hi = op.cell_hi(k);
    out += format_double(lo) + ',' + format_double(hi) + ',' +
           format_double(density(0.5 * (lo + hi))) + '\n';
  }
  return out;
}

constexpr std::size_t kConditionHorizon = 64;

template <typename F>
json attempt(F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    return {{"error", e.what()}};
  } catch (const ConvergenceError& e) {
    return {{"error", e.what()}, {"residual", e.residual()}};
  }
}

// Limiting variance predicted for h_a: the resolvent series for a > sqrt 2,
// the recursion from the window top otherwise.
double predicted_tent_variance(const TentModel& model, const RunConfig& cfg) {
  if (model.params.m == 0) return sigma2_resolvent(model.h().f, model.transfer(), cfg.truncation_J).sigma2;
  const TentModel top = tent_model(tent_window_top(cfg.a), cfg.grid_n);
  const VarianceEstimate base = sigma2_resolvent(top.h().f, top.transfer(), cfg.truncation_J);
  const double s = sigma_recursion(cfg.a, base);
  return s * s;
}

}  // namespace

void RunConfig::validate() const {
  if (map != "tent" && map != "three-branch") {
    throw ConfigError("map must be 'tent' or 'three-branch', got '" + map + "'");
  }
  if (map == "tent") {
    try {
      validate_tent_parameter(a);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (grid_n < 2 || grid_n > (std::size_t{1} << 16)) throw ConfigError("grid must lie in [2, 65536]");
  if (steps_n < 1 || steps_n > (std::size_t{1} << 22)) throw ConfigError("steps must lie in [1, 4194304]");
  if (paths < 1 || paths > 1'000'000) throw ConfigError("paths must lie in [1, 1000000]");
  if (truncation_J < 1 || truncation_J > 4096) throw ConfigError("trunc must lie in [1, 4096]");
  if (format != "csv" && format != "json") throw ConfigError("format must be 'csv' or 'json'");
  const auto& names = criterion_names();
  for (const auto& o : only) {
    if (std::find(names.begin(), names.end(), o) == names.end()) {
      throw ConfigError("unknown criterion '" + o + "'");
    }
  }
}

json RunConfig::to_json() const {
  return {{"map", map},       {"a", a},         {"grid_n", grid_n},
          {"steps_n", steps_n}, {"paths", paths}, {"seed", seed},
          {"truncation_J", truncation_J}, {"output_path", output_path},
          {"format", format}, {"only", only}};
}

CommandOutput cmd_density(const RunConfig& cfg) {
  cfg.validate();
  CommandOutput out;
  out.report = header("density", cfg);
  // tent: discretize the invariant core A, where all of the density lives
  const PiecewiseLinearMap map = cfg.is_tent() ? tent_core_map(cfg.a) : make_map(cfg);
  const UlamOperator op = ulam_matrix(map, cfg.grid_n);
  const InvariantDensityResult res = invariant_density(op);
  json& r = out.report;
  r["domain"] = to_json(op.domain());
  r["residual"] = res.residual;
  r["iterations"] = res.iterations;
  r["row_sum_error"] = op.max_row_sum_error();

  // periodicity is read off the core interval, where the cycle lives
  try {
    const PeriodDetection pd = detect_periodicity_refined(map, cfg.grid_n, 4 * cfg.grid_n);
    r["period_detected"] = pd.period;
    r["period_grid"] = pd.grid;
  } catch (const DetectionError& e) {
    r["period_detected"] = nullptr;
    r["period_error"] = e.what();
  }
  json masses = json::array();
  if (cfg.is_tent()) {
    r["period_formula"] = period_of(cfg.a);
    for (const Interval& iv : support_cycle(cfg.a).intervals) {
      masses.push_back({{"interval", to_json(iv)}, {"mass", mass_on(res.density, iv)}});
    }
  } else {
    for (const Interval& iv : {Interval(0.0, 0.5), Interval(0.5, 1.0)}) {
      masses.push_back({{"interval", to_json(iv)}, {"mass", mass_on(res.density, iv)}});
    }
  }
  r["support_masses"] = masses;
  r["min_value"] = res.density.min_value();
  r["max_value"] = res.density.sup_abs();
  out.data_csv = grid_csv(op, res.density);
  emit(cfg, out);
  return out;
}

CommandOutput cmd_variance(const RunConfig& cfg) {
  cfg.validate();
  CommandOutput out;
  out.report = header("variance", cfg);
  json& r = out.report;
  const std::size_t J = cfg.truncation_J;
  // finite-horizon diagnostic, independent of the series cap
  const std::size_t K = kConditionHorizon;
  if (cfg.is_tent()) {
    const TentModel model = tent_model(cfg.a, cfg.grid_n);
    const NormalizedTransfer op = model.transfer();
    const PAF h = model.h().f;
    r["mean"] = model.mean;
    r["period"] = model.params.r;
    r["xstar"] = model.params.xstar;
    if (model.params.m == 0) {
      r["resolvent"] = attempt([&] { return to_json(sigma2_resolvent(h, op, J)); });
    } else {
      // T_a cycles through r > 1 intervals, so P^n h oscillates instead of decaying
      r["resolvent"] = {{"skipped", "not mixing for a <= sqrt 2; see autocov and recursion"}};
    }
    r["autocov"] = attempt([&] { return to_json(sigma2_autocov(h, op, model.cycle, J)); });
    if (model.params.m >= 1) {
      r["recursion"] = attempt([&]() -> json {
        const TentModel top = tent_model(tent_window_top(cfg.a), cfg.grid_n);
        const VarianceEstimate base = sigma2_resolvent(top.h().f, top.transfer(), J);
        const double s = sigma_recursion(cfg.a, base);
        return {{"sigma2", s * s},
                {"sigma", s},
                {"sigma_product_form", sigma_recursion_product(cfg.a, base)},
                {"method", method_name(VarianceMethod::recursion)},
                {"base_a", top.a},
                {"base", to_json(base)}};
      });
    }
    if (model.params.m == 0) {
      r["appendixB"] = attempt([&] {
        return to_json(eta_appendixB(h, op, {{Interval(-1.0, 1.0)}}, kDefaultDyadicLevels));
      });
    } else {
      r["appendixB"] = {{"skipped", "not mixing for a <= sqrt 2; the dyadic terms do not settle"}};
    }
    r["condition"] = attempt([&] { return to_json(condition_report(h, op, K)); });
  } else {
    const NormalizedTransfer op(three_branch_example(), lebesgue01());
    const PAF h = three_branch_h();
    r["eta"] = to_json(eta_nonergodic(h, op, three_branch_components(), J));
    r["appendixB"] = attempt([&] {
      return to_json(eta_appendixB(h, op, {{Interval(0.0, 0.5)}, {Interval(0.5, 1.0)}},
                                   kDefaultDyadicLevels));
    });
    r["condition"] = attempt([&] { return to_json(condition_report(h, op, K)); });
  }
  emit(cfg, out);
  return out;
}

CommandOutput cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  CommandOutput out;
  out.report = header("simulate", cfg);
  json& r = out.report;
  CltSample sample;
  EtaProfile eta;
  if (cfg.is_tent()) {
    const TentModel model = tent_model(cfg.a, cfg.grid_n);
    const std::vector<double> inits = sample_initial(model.density, cfg.paths, cfg.seed);
    sample = partial_sum_paths(model.map, model.h().f, cfg.steps_n, kTimeGrid, inits, cfg.seed);
    EtaComponent c;
    c.support = {Interval(-1.0, 1.0)};
    c.mass = 1.0;
    c.value = predicted_tent_variance(model, cfg);
    eta.components.push_back(c);
    sample.init_sampler = "invariant density of tent(" + format_double(cfg.a) + ")";
  } else {
    const NormalizedTransfer op(three_branch_example(), lebesgue01());
    const std::vector<double> inits = sample_initial(lebesgue01(), cfg.paths, cfg.seed);
    sample = partial_sum_paths(three_branch_example(), three_branch_h(), cfg.steps_n, kTimeGrid,
                               inits, cfg.seed);
    eta = eta_nonergodic(three_branch_h(), op, three_branch_components(), cfg.truncation_J);
    sample.init_sampler = "uniform on [0,1]";
  }
  json gof = json::array();
  for (const GofReport& g : limit_law_check(sample, eta)) gof.push_back(to_json(g));
  const std::vector<double> last = sample.column(kTimeGrid.size() - 1);
  const double N = static_cast<double>(last.size());
  const double mean = std::accumulate(last.begin(), last.end(), 0.0) / N;
  double var = 0.0;
  for (double v : last) var += (v - mean) * (v - mean);
  var /= std::max(1.0, N - 1.0);
  double predicted = 0.0, mass = 0.0;
  for (const auto& c : eta.components) {
    predicted += c.mass * c.value;
    mass += c.mass;
  }
  r["init_sampler"] = sample.init_sampler;
  r["t_grid"] = sample.t_grid;
  r["eta"] = to_json(eta);
  r["gof"] = gof;
  r["w1_mean"] = mean;
  r["w1_mean_stderr"] = std::sqrt(var / N);
  r["w1_variance"] = var;
  r["predicted_variance"] = predicted / mass;
  out.data_csv = sample_csv(sample);
  emit(cfg, out);
  return out;
}

CommandOutput cmd_verify(const RunConfig& cfg) {
  cfg.validate();
  CommandOutput out;
  out.report = header("verify", cfg);
  AcceptanceOptions opts;
  opts.grid = cfg.grid_n;
  opts.seed = cfg.seed;
  json crit = json::array();
  bool all = true;
  for (const CriterionResult& c : run_acceptance(opts, cfg.only)) {
    all = all && c.passed;
    crit.push_back({{"id", c.id},
                    {"name", c.name},
                    {"passed", c.passed},
                    {"summary", c.summary},
                    {"measured", c.measured}});
  }
  out.report["criteria"] = crit;
  out.report["passed"] = all;
  out.passed = all;
  emit(cfg, out);
  return out;
}

}  // namespace ergclt

#include "ergclt/ergclt.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "densities.hpp"
#include "errors.hpp"
#include "maps.hpp"

struct ergclt_map {
  ergclt::PiecewiseLinearMap map;
};

struct ergclt_density {
  ergclt::PAF g;
};

namespace {

thread_local std::string g_last_error;

ergclt_status fail(ergclt_status s, const char* what) {
  g_last_error = what;
  return s;
}

// Translates the C++ error hierarchy into status codes.  Order matters:
// ConfigError and PreconditionError both derive from invalid_argument.
template <typename F>
ergclt_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const ergclt::ConfigError& e) {
    return fail(ERGCLT_INVALID_ARGUMENT, e.what());
  } catch (const ergclt::PreconditionError& e) {
    return fail(ERGCLT_PRECONDITION, e.what());
  } catch (const ergclt::DomainError& e) {
    return fail(ERGCLT_DOMAIN, e.what());
  } catch (const ergclt::ConvergenceError& e) {
    return fail(ERGCLT_CONVERGENCE, e.what());
  } catch (const ergclt::DetectionError& e) {
    return fail(ERGCLT_DETECTION, e.what());
  } catch (const ergclt::NumericalError& e) {
    return fail(ERGCLT_NUMERICAL, e.what());
  } catch (const ergclt::IoError& e) {
    return fail(ERGCLT_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ERGCLT_INTERNAL, "out of memory");
  } catch (const std::invalid_argument& e) {
    return fail(ERGCLT_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ERGCLT_INTERNAL, e.what());
  } catch (...) {
    return fail(ERGCLT_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

ergclt::RunConfig to_config(const ergclt_run_config* c) {
  if (!c) throw std::invalid_argument("config is null");
  ergclt::RunConfig cfg;
  if (c->map) cfg.map = c->map;
  cfg.a = c->a;
  cfg.grid_n = c->grid_n;
  cfg.steps_n = c->steps_n;
  cfg.paths = c->paths;
  cfg.seed = c->seed;
  cfg.truncation_J = c->truncation_J;
  if (c->output_path) cfg.output_path = c->output_path;
  if (c->format) cfg.format = c->format;
  if (c->only && *c->only) {
    std::stringstream ss(c->only);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) cfg.only.push_back(name);
    }
  }
  return cfg;
}

using Command = ergclt::CommandOutput (*)(const ergclt::RunConfig&);

ergclt_status run_command(Command cmd, const ergclt_run_config* c, char** report, char** csv) {
  if (report) *report = nullptr;
  if (csv) *csv = nullptr;
  return guarded([&] {
    const ergclt::CommandOutput out = cmd(to_config(c));
    char* r = report ? dup_string(out.report.dump(2)) : nullptr;
    try {
      if (csv) *csv = dup_string(out.data_csv);
    } catch (...) {
      std::free(r);
      throw;
    }
    if (report) *report = r;
    if (!out.passed) return fail(ERGCLT_CRITERION_FAILED, "one or more criteria failed");
    return ERGCLT_OK;
  });
}

}  // namespace

extern "C" {

const char* ergclt_last_error(void) { return g_last_error.c_str(); }

const char* ergclt_status_string(ergclt_status s) {
  switch (s) {
    case ERGCLT_OK: return "ok";
    case ERGCLT_INVALID_ARGUMENT: return "invalid argument";
    case ERGCLT_DOMAIN: return "domain error";
    case ERGCLT_PRECONDITION: return "precondition violated";
    case ERGCLT_CONVERGENCE: return "convergence failure";
    case ERGCLT_DETECTION: return "detection failure";
    case ERGCLT_NUMERICAL: return "numerical failure";
    case ERGCLT_IO: return "I/O error";
    case ERGCLT_CRITERION_FAILED: return "criterion failed";
    case ERGCLT_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ergclt_status ergclt_map_tent(double a, ergclt_map** out) {
  if (!out) return fail(ERGCLT_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] {
    *out = new ergclt_map{ergclt::tent_map(a)};
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_map_three_branch(ergclt_map** out) {
  if (!out) return fail(ERGCLT_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] {
    *out = new ergclt_map{ergclt::three_branch_example()};
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_map_evaluate(const ergclt_map* m, double x, double* out) {
  if (!m || !out) return fail(ERGCLT_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    if (!m->map.domain().contains(x)) throw ergclt::DomainError("x outside the map domain");
    *out = m->map(x);
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_map_iterate(const ergclt_map* m, double x, size_t n, double* orbit) {
  if (!m || !orbit) return fail(ERGCLT_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    if (!m->map.domain().contains(x)) throw ergclt::DomainError("x outside the map domain");
    const auto o = m->map.iterate(x, n);
    std::memcpy(orbit, o.data(), o.size() * sizeof(double));
    return ERGCLT_OK;
  });
}

void ergclt_map_free(ergclt_map* m) { delete m; }

ergclt_status ergclt_period_of(double a, int* out) {
  if (!out) return fail(ERGCLT_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = ergclt::period_of(a);
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_density_invariant(const ergclt_map* m, size_t grid, ergclt_density** out,
                                       double* residual) {
  if (!m || !out) return fail(ERGCLT_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    if (grid < 2) throw std::invalid_argument("grid must be at least 2");
    auto res = ergclt::invariant_density(ergclt::ulam_matrix(m->map, grid));
    if (residual) *residual = res.residual;
    *out = new ergclt_density{std::move(res.density)};
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_density_tent_recursive(double a, size_t grid, ergclt_density** out) {
  if (!out) return fail(ERGCLT_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] {
    if (grid < 2) throw std::invalid_argument("grid must be at least 2");
    *out = new ergclt_density{ergclt::tent_density_recursive(a, grid)};
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_density_value(const ergclt_density* d, double x, double* out) {
  if (!d || !out) return fail(ERGCLT_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = d->g(x);
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_density_write_csv(const ergclt_density* d, const char* path) {
  if (!d || !path) return fail(ERGCLT_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    ergclt::write_atomic(path, ergclt::density_csv(d->g));
    return ERGCLT_OK;
  });
}

ergclt_status ergclt_detect_periodicity(const ergclt_map* m, size_t grid, int* out) {
  if (!m || !out) return fail(ERGCLT_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    if (grid < 2) throw std::invalid_argument("grid must be at least 2");
    *out = ergclt::detect_periodicity(ergclt::ulam_matrix(m->map, grid));
    return ERGCLT_OK;
  });
}

void ergclt_density_free(ergclt_density* d) { delete d; }

void ergclt_run_config_init(ergclt_run_config* cfg) {
  if (!cfg) return;
  static const ergclt::RunConfig defaults;
  cfg->map = "tent";
  cfg->a = defaults.a;
  cfg->grid_n = defaults.grid_n;
  cfg->steps_n = defaults.steps_n;
  cfg->paths = defaults.paths;
  cfg->seed = defaults.seed;
  cfg->truncation_J = defaults.truncation_J;
  cfg->output_path = nullptr;
  cfg->format = "json";
  cfg->only = nullptr;
}

ergclt_status ergclt_cmd_density(const ergclt_run_config* cfg, char** report_json, char** data_csv) {
  return run_command(ergclt::cmd_density, cfg, report_json, data_csv);
}

ergclt_status ergclt_cmd_variance(const ergclt_run_config* cfg, char** report_json, char** data_csv) {
  return run_command(ergclt::cmd_variance, cfg, report_json, data_csv);
}

ergclt_status ergclt_cmd_simulate(const ergclt_run_config* cfg, char** report_json, char** data_csv) {
  return run_command(ergclt::cmd_simulate, cfg, report_json, data_csv);
}

ergclt_status ergclt_cmd_verify(const ergclt_run_config* cfg, char** report_json, char** data_csv) {
  return run_command(ergclt::cmd_verify, cfg, report_json, data_csv);
}

void ergclt_string_free(char* s) { std::free(s); }

}  // extern "C"

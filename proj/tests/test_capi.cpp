#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include <ergclt/ergclt.h>

using doctest::Approx;

namespace {

bool has(const char* s, const char* needle) { return s && std::strstr(s, needle) != nullptr; }

}  // namespace

TEST_CASE("maps through the C interface") {
  ergclt_map* m = nullptr;
  REQUIRE(ergclt_map_tent(2.0, &m) == ERGCLT_OK);
  CHECK(std::string(ergclt_last_error()).empty());
  double y = 0.0;
  CHECK(ergclt_map_evaluate(m, 0.0, &y) == ERGCLT_OK);
  CHECK(y == 1.0);
  double orbit[3];
  CHECK(ergclt_map_iterate(m, 0.0, 2, orbit) == ERGCLT_OK);
  CHECK(orbit[0] == 0.0);
  CHECK(orbit[1] == 1.0);
  CHECK(orbit[2] == -1.0);
  CHECK(ergclt_map_evaluate(m, 1.5, &y) == ERGCLT_DOMAIN);
  CHECK(std::strlen(ergclt_last_error()) > 0);
  CHECK(ergclt_map_evaluate(nullptr, 0.0, &y) == ERGCLT_INVALID_ARGUMENT);
  CHECK(ergclt_map_evaluate(m, 0.0, nullptr) == ERGCLT_INVALID_ARGUMENT);
  ergclt_map_free(m);
  ergclt_map_free(nullptr);

  ergclt_map* bad = nullptr;
  CHECK(ergclt_map_tent(2.5, &bad) == ERGCLT_DOMAIN);
  CHECK(bad == nullptr);
  CHECK(ergclt_map_tent(1.5, nullptr) == ERGCLT_INVALID_ARGUMENT);

  int r = 0;
  CHECK(ergclt_period_of(1.1, &r) == ERGCLT_OK);
  CHECK(r == 4);
  CHECK(ergclt_period_of(0.5, &r) == ERGCLT_DOMAIN);
  CHECK(std::string(ergclt_status_string(ERGCLT_IO)).size() > 0);
}

TEST_CASE("densities through the C interface") {
  ergclt_map* tb = nullptr;
  REQUIRE(ergclt_map_three_branch(&tb) == ERGCLT_OK);
  ergclt_density* d = nullptr;
  double residual = 1.0;
  REQUIRE(ergclt_density_invariant(tb, 256, &d, &residual) == ERGCLT_OK);
  CHECK(residual <= 1e-10);
  double v = 0.0;
  CHECK(ergclt_density_value(d, 0.3, &v) == ERGCLT_OK);
  CHECK(v == Approx(1.0).epsilon(1e-9));
  int p = 0;
  CHECK(ergclt_detect_periodicity(tb, 256, &p) == ERGCLT_OK);
  CHECK(p == 1);
  ergclt_density* tiny = d;
  CHECK(ergclt_density_invariant(tb, 1, &tiny, nullptr) == ERGCLT_INVALID_ARGUMENT);
  CHECK(tiny == nullptr);  // cleared on failure

  const auto path = (std::filesystem::temp_directory_path() / "ergclt_capi_density.csv").string();
  CHECK(ergclt_density_write_csv(d, path.c_str()) == ERGCLT_OK);
  CHECK(std::filesystem::file_size(path) > 0);
  std::filesystem::remove(path);
  CHECK(ergclt_density_write_csv(d, "/nonexistent-dir/x.csv") == ERGCLT_IO);
  ergclt_density_free(d);
  ergclt_map_free(tb);

  ergclt_density* rec = nullptr;
  REQUIRE(ergclt_density_tent_recursive(1.3, 1024, &rec) == ERGCLT_OK);
  CHECK(ergclt_density_value(rec, 0.9, &v) == ERGCLT_OK);
  CHECK(v == 0.0);  // off the core
  ergclt_density_free(rec);
}

TEST_CASE("commands through the C interface") {
  ergclt_run_config cfg;
  ergclt_run_config_init(&cfg);
  CHECK(std::string(cfg.map) == "tent");
  CHECK(cfg.a == 2.0);

  char* report = nullptr;
  char* csv = nullptr;
  cfg.grid_n = 64;
  REQUIRE(ergclt_cmd_density(&cfg, &report, &csv) == ERGCLT_OK);
  CHECK(has(report, "\"schema_version\""));
  CHECK(has(csv, "cell_lo,cell_hi,value"));
  ergclt_string_free(report);
  ergclt_string_free(csv);

  cfg.map = "three-branch";
  report = nullptr;
  REQUIRE(ergclt_cmd_variance(&cfg, &report, nullptr) == ERGCLT_OK);
  CHECK(has(report, "\"eta\""));
  ergclt_string_free(report);

  cfg.steps_n = 64;
  cfg.paths = 50;
  csv = nullptr;
  REQUIRE(ergclt_cmd_simulate(&cfg, nullptr, &csv) == ERGCLT_OK);
  CHECK(has(csv, "path_id,t,value"));
  ergclt_string_free(csv);

  ergclt_run_config_init(&cfg);
  cfg.only = "worked_variance,nonergodic";
  report = nullptr;
  CHECK(ergclt_cmd_verify(&cfg, &report, nullptr) == ERGCLT_OK);
  CHECK(has(report, "\"passed\": true"));
  ergclt_string_free(report);

  cfg.grid_n = 4;
  cfg.only = "periodicity";
  report = nullptr;
  CHECK(ergclt_cmd_verify(&cfg, &report, nullptr) == ERGCLT_CRITERION_FAILED);
  CHECK(has(report, "\"passed\": false"));
  ergclt_string_free(report);

  ergclt_run_config_init(&cfg);
  cfg.a = 3.0;
  CHECK(ergclt_cmd_density(&cfg, nullptr, nullptr) == ERGCLT_INVALID_ARGUMENT);
  CHECK(has(ergclt_last_error(), "a"));
  cfg.a = 2.0;
  cfg.only = "bogus";
  CHECK(ergclt_cmd_verify(&cfg, nullptr, nullptr) == ERGCLT_INVALID_ARGUMENT);
  CHECK(ergclt_cmd_density(nullptr, nullptr, nullptr) == ERGCLT_INVALID_ARGUMENT);

  ergclt_run_config_init(&cfg);
  cfg.grid_n = 16;
  cfg.output_path = "/nonexistent-dir/run";
  CHECK(ergclt_cmd_density(&cfg, nullptr, nullptr) == ERGCLT_IO);
  ergclt_string_free(nullptr);
}

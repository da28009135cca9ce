#ifndef ERGCLT_ERGCLT_H
#define ERGCLT_ERGCLT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ERGCLT_API __declspec(dllexport)
#else
#define ERGCLT_API __attribute__((visibility("default")))
#endif

typedef enum ergclt_status {
  ERGCLT_OK = 0,
  ERGCLT_INVALID_ARGUMENT = 1,  /* null pointer, bad config field */
  ERGCLT_DOMAIN = 2,            /* parameter outside the admissible range */
  ERGCLT_PRECONDITION = 3,      /* e.g. uncentered observable */
  ERGCLT_CONVERGENCE = 4,
  ERGCLT_DETECTION = 5,
  ERGCLT_NUMERICAL = 6,
  ERGCLT_IO = 7,
  ERGCLT_CRITERION_FAILED = 8,  /* verify ran but some criterion failed */
  ERGCLT_INTERNAL = 9
} ergclt_status;

/* Message of the last failing call on this thread; "" after success. */
ERGCLT_API const char* ergclt_last_error(void);
ERGCLT_API const char* ergclt_status_string(ergclt_status s);

typedef struct ergclt_map ergclt_map;
typedef struct ergclt_density ergclt_density;

ERGCLT_API ergclt_status ergclt_map_tent(double a, ergclt_map** out);
ERGCLT_API ergclt_status ergclt_map_three_branch(ergclt_map** out);
ERGCLT_API ergclt_status ergclt_map_evaluate(const ergclt_map* m, double x, double* out);
/* orbit must hold n + 1 values; orbit[0] = x. */
ERGCLT_API ergclt_status ergclt_map_iterate(const ergclt_map* m, double x, size_t n, double* orbit);
ERGCLT_API void ergclt_map_free(ergclt_map* m);

/* Period 2^m of the tent map's support cycle. */
ERGCLT_API ergclt_status ergclt_period_of(double a, int* out);

/* Ulam density of the map on `grid` cells. */
ERGCLT_API ergclt_status ergclt_density_invariant(const ergclt_map* m, size_t grid, ergclt_density** out,
                                                  double* residual);
/* Tent density via the conjugacy recursion from the window top. */
ERGCLT_API ergclt_status ergclt_density_tent_recursive(double a, size_t grid, ergclt_density** out);
ERGCLT_API ergclt_status ergclt_density_value(const ergclt_density* d, double x, double* out);
ERGCLT_API ergclt_status ergclt_density_write_csv(const ergclt_density* d, const char* path);
/* Cycle length of supports under the Ulam operator of the map. */
ERGCLT_API ergclt_status ergclt_detect_periodicity(const ergclt_map* m, size_t grid, int* out);
ERGCLT_API void ergclt_density_free(ergclt_density* d);

typedef struct ergclt_run_config {
  const char* map; /* "tent" or "three-branch" */
  double a;
  size_t grid_n;
  size_t steps_n;
  size_t paths;
  uint64_t seed;
  size_t truncation_J;
  const char* output_path; /* NULL or "": nothing written */
  const char* format;      /* "json" or "csv" */
  const char* only;        /* comma separated criterion names, NULL for all */
} ergclt_run_config;

/* Fills the defaults used by the command line. */
ERGCLT_API void ergclt_run_config_init(ergclt_run_config* cfg);

/* Commands return the JSON report and CSV data as malloc'd strings owned by
   the caller (release with ergclt_string_free); either pointer may be NULL. */
ERGCLT_API ergclt_status ergclt_cmd_density(const ergclt_run_config* cfg, char** report_json, char** data_csv);
ERGCLT_API ergclt_status ergclt_cmd_variance(const ergclt_run_config* cfg, char** report_json, char** data_csv);
ERGCLT_API ergclt_status ergclt_cmd_simulate(const ergclt_run_config* cfg, char** report_json, char** data_csv);
/* ERGCLT_CRITERION_FAILED when any criterion fails; the report is still set. */
ERGCLT_API ergclt_status ergclt_cmd_verify(const ergclt_run_config* cfg, char** report_json, char** data_csv);
ERGCLT_API void ergclt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

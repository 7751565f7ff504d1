#ifndef BDLIE_H
#define BDLIE_H

/* C interface to the birth-death-immigration solver.
 *
 * Every object is an opaque handle created by one function and released by
 * its matching _free. Calls that can fail return bdlie_status and, when an
 * err_msg out-parameter is given and non-NULL, leave a malloc'd description
 * there on failure (release with bdlie_string_free). Out-parameters are
 * untouched on failure.
 *
 * A process is the model alone: division rate lambda(t), death rate mu(t),
 * and the immigration ratio beta (immigration runs at beta * lambda(t)).
 * A scenario adds the run parameters (initial count, time grid, tolerances,
 * simulation settings) and drives the command layer, which produces named
 * text artifacts (CSV or JSON) plus an exit code.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BDLIE_BUILD)
#define BDLIE_API __declspec(dllexport)
#else
#define BDLIE_API __declspec(dllimport)
#endif
#else
#define BDLIE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bdlie_status {
  BDLIE_OK = 0,
  BDLIE_USAGE = 1,
  BDLIE_PARSE = 2,
  BDLIE_DOMAIN = 3,
  BDLIE_INTEGRATION = 4,
  BDLIE_OVERFLOW = 5,
  BDLIE_SINGULAR = 6,
  BDLIE_TRUNCATION = 7,
  BDLIE_TAIL = 8,
  BDLIE_NOT_CLOSED = 9,
  BDLIE_VERIFY_FAILED = 10,
  BDLIE_IO = 11,
  BDLIE_INTERNAL = 12
} bdlie_status;

typedef struct bdlie_process bdlie_process;
typedef struct bdlie_scenario bdlie_scenario;
typedef struct bdlie_result bdlie_result;

BDLIE_API const char* bdlie_version(void);

/* ---- process-level numerics ---- */

/* spec_json: {"lambda": {"kind": ..., "params": {...}},
 *             "mu": {...}, "beta": number}. Unknown keys are rejected. */
BDLIE_API bdlie_status bdlie_process_from_json(const char* spec_json, bdlie_process** out,
                                               char** err_msg);
BDLIE_API void bdlie_process_free(bdlie_process* p);

/* out[6] = {rho, W, g1, g2, g3, g4} at time t. */
BDLIE_API bdlie_status bdlie_gauge_at(const bdlie_process* p, double t, double out[6],
                                      char** err_msg);

/* Row-major table, 6 values per time, times strictly increasing and >= 0. */
BDLIE_API bdlie_status bdlie_gauge_table(const bdlie_process* p, const double* times,
                                         size_t n_times, double* out, char** err_msg);

BDLIE_API bdlie_status bdlie_log_transition_prob(const bdlie_process* p, double t, long n0,
                                                 long m, double* out, char** err_msg);

/* *probs is malloc'd (release with bdlie_buffer_free); holds m = 0..*n_probs-1. */
BDLIE_API bdlie_status bdlie_transition_pmf(const bdlie_process* p, double t, long n0,
                                            double tail_tol, double** probs, size_t* n_probs,
                                            double* tail_mass, char** err_msg);

BDLIE_API bdlie_status bdlie_mean_from_one(const bdlie_process* p, double t, double* out,
                                           char** err_msg);

/* ---- scenario runs ---- */

BDLIE_API bdlie_status bdlie_scenario_parse(const char* json_text, bdlie_scenario** out,
                                            char** err_msg);
BDLIE_API void bdlie_scenario_free(bdlie_scenario* sc);

/* Canonical re-serialization; release with bdlie_string_free. */
BDLIE_API char* bdlie_scenario_canonical_json(const bdlie_scenario* sc);

/* command: gauge | pmf | mean | simulate | oracle | verify | closure.
 * overrides_json (NULL for none): {"format": "csv"|"json", "seed": n,
 * "trajectories": n, "tail_tol": x}.
 * The call succeeds whenever a result exists, even if the command itself
 * failed; inspect bdlie_result_exit_code. */
BDLIE_API bdlie_status bdlie_run(const bdlie_scenario* sc, const char* command,
                                 const char* overrides_json, bdlie_result** out,
                                 char** err_msg);

BDLIE_API int bdlie_result_exit_code(const bdlie_result* r);
BDLIE_API const char* bdlie_result_summary(const bdlie_result* r);
BDLIE_API size_t bdlie_result_artifact_count(const bdlie_result* r);
BDLIE_API const char* bdlie_result_artifact_name(const bdlie_result* r, size_t i);
BDLIE_API const char* bdlie_result_artifact_text(const bdlie_result* r, size_t i);
BDLIE_API void bdlie_result_free(bdlie_result* r);

BDLIE_API void bdlie_string_free(char* s);
BDLIE_API void bdlie_buffer_free(double* b);

#ifdef __cplusplus
}
#endif

#endif /* BDLIE_H */

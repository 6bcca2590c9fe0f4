/* Public C interface of the OPTWVP solver toolkit.
 *
 * Conventions:
 *   - every function returns OPTWVP_OK (0) on success, OPTWVP_ERR_CONFIG (2)
 *     for bad arguments / unknown names / size caps, OPTWVP_ERR_RUNTIME (1)
 *     for everything else (I/O, parse failures, internal trouble);
 *   - on failure, optwvp_last_error() returns a message for the calling
 *     thread, valid until that thread's next failing call;
 *   - objects come back through opaque handles the caller must free with the
 *     matching *_free function; strings returned through char** out-params
 *     must be released with optwvp_string_free.
 */
#ifndef OPTWVP_H
#define OPTWVP_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define OPTWVP_OK 0
#define OPTWVP_ERR_RUNTIME 1
#define OPTWVP_ERR_CONFIG 2

typedef struct optwvp_instance optwvp_instance;
typedef struct optwvp_schedule optwvp_schedule;
typedef struct optwvp_policy optwvp_policy;

const char* optwvp_version(void);
const char* optwvp_last_error(void);
void optwvp_string_free(char* s);

/* ---- instances ---------------------------------------------------------- */

int optwvp_instance_generate(int n, double window_width, double budget,
                             uint64_t seed, optwvp_instance** out);
int optwvp_instance_load_file(const char* path, optwvp_instance** out);
int optwvp_instance_load_string(const char* text, optwvp_instance** out);
/* format: "native" or "solomon" */
int optwvp_instance_read(const char* path, const char* format,
                         optwvp_instance** out);
int optwvp_instance_save_file(const optwvp_instance* inst, const char* path);
int optwvp_instance_save_string(const optwvp_instance* inst, char** out_text);
int optwvp_instance_parse_solomon_file(const char* path, optwvp_instance** out);
int optwvp_instance_size(const optwvp_instance* inst, int* out_n);
int optwvp_instance_budget(const optwvp_instance* inst, double* out_budget);
int optwvp_instance_metadata(const optwvp_instance* inst, char** out_text);
/* newline-separated violation report; count 0 and empty text when clean */
int optwvp_instance_validate(const optwvp_instance* inst, char** out_report,
                             int* out_count);
void optwvp_instance_free(optwvp_instance* inst);

/* ---- schedules ---------------------------------------------------------- */

int optwvp_schedule_reward(const optwvp_instance* inst,
                           const optwvp_schedule* sched, double* out);
int optwvp_schedule_ptar(const optwvp_instance* inst,
                         const optwvp_schedule* sched, double* out);
int optwvp_schedule_length(const optwvp_schedule* sched, int* out);
/* newline-separated violations; count 0 when feasible */
int optwvp_schedule_check(const optwvp_instance* inst,
                          const optwvp_schedule* sched, char** out_report,
                          int* out_count);
int optwvp_schedule_save_string(const optwvp_schedule* sched, char** out_text);
int optwvp_schedule_load_string(const char* text, optwvp_schedule** out);
void optwvp_schedule_free(optwvp_schedule* sched);

/* ---- solving ------------------------------------------------------------ */

typedef struct optwvp_solve_options {
  double time_limit_s;          /* <= 0: solver default / unlimited */
  uint64_t seed;
  uint64_t ils_max_iterations;  /* 0: unlimited */
  int ils_no_improve_limit;     /* <= 0: default */
  int ils_perturbation;         /* <= 0: default */
  int exact_max_visits;         /* <= 0: all customers */
  const optwvp_policy* policy;  /* NULL: untrained default weights */
} optwvp_solve_options;

void optwvp_solve_options_init(optwvp_solve_options* opts);

/* method: greedy_prs | ils | policy | policy_sto | exact | fixed_ratio:<r> */
int optwvp_solve(const optwvp_instance* inst, const char* method,
                 const optwvp_solve_options* opts, optwvp_schedule** out,
                 double* out_runtime_ms);

/* Optimal service times for a fixed route (route = vertex ids, depot first
 * and last). */
int optwvp_optimize_service_times(const optwvp_instance* inst,
                                  const int* route, int route_len,
                                  optwvp_schedule** out, double* out_reward);

int optwvp_exact_solve(const optwvp_instance* inst, int max_visits,
                       double time_limit_s, optwvp_schedule** out,
                       double* out_reward, int* out_complete);

/* ---- policy ------------------------------------------------------------- */

int optwvp_policy_create(optwvp_policy** out);
int optwvp_policy_load_file(const char* path, optwvp_policy** out);
int optwvp_policy_save_file(const optwvp_policy* policy, const char* path);
void optwvp_policy_free(optwvp_policy* policy);

typedef struct optwvp_train_options {
  int n;
  double window_width;
  double budget;
  int epochs;
  int batch;
  double beta1;
  double beta2;
  double learning_rate;
  uint64_t seed;
  int val_size;
} optwvp_train_options;

void optwvp_train_options_init(optwvp_train_options* opts);

/* Trains from the library's default starting point (seeded from opts->seed:
 * small random weights, commit-everything service bias) and returns the best
 * held-out checkpoint of the run.  out_curve (optional): newline-separated
 * held-out mean rewards, entry 0 is the untrained policy. */
int optwvp_train(const optwvp_train_options* opts, optwvp_policy** out,
                 char** out_curve);

/* ---- benchmarking ------------------------------------------------------- */

typedef struct optwvp_bench_options {
  const char* reference;       /* "none" or "exact" */
  const char* instance_format; /* "native" or "solomon" */
  const char* export_format;   /* "csv" or "text" */
  int exact_size_cap;          /* <= 0: default 9 */
  int threads;                 /* <= 0: hardware concurrency */
  optwvp_solve_options solve;  /* ils/exact settings, seed, policy */
} optwvp_bench_options;

void optwvp_bench_options_init(optwvp_bench_options* opts);

/* methods_csv: comma-separated method names.  out_records receives the full
 * export in the requested format; out_summary (optional) a per-method
 * aggregate table. */
int optwvp_bench_run(const char* const* instance_paths, int n_paths,
                     const char* methods_csv,
                     const optwvp_bench_options* opts, char** out_records,
                     char** out_summary);

/* ratios: array of values in [0,1].  out_table receives one
 * "ratio mean_gap_percent" row per ratio. */
int optwvp_ratio_sweep(const char* const* instance_paths, int n_paths,
                       const double* ratios, int n_ratios,
                       const optwvp_bench_options* opts, char** out_table);

#ifdef __cplusplus
}
#endif

#endif /* OPTWVP_H */

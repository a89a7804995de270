/* hcdet: Hamiltonian cycles by determinant minimization over (doubly)
 * stochastic relaxations. C interface with opaque handles; every fallible
 * call returns an hcdet_status and records a message for hcdet_last_error().
 */
#ifndef HCDET_H
#define HCDET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(HCDET_BUILDING)
#define HCDET_API __attribute__((visibility("default")))
#else
#define HCDET_API
#endif

typedef enum hcdet_status {
  HCDET_OK = 0,
  HCDET_E_INVALID = 1,
  HCDET_E_PARSE = 2,
  HCDET_E_IO = 3,
  HCDET_E_INFEASIBLE = 4,
  HCDET_E_CAP = 5,
  HCDET_E_INTERNAL = 6
} hcdet_status;

typedef enum hcdet_outcome {
  HCDET_HC_FOUND = 0,
  HCDET_NO_HC_DISCONNECTED = 1,
  HCDET_NO_HC_LOCAL_MIN = 2,
  HCDET_GAVE_UP = 3
} hcdet_outcome;

typedef enum hcdet_mode { HCDET_MODE_S = 0, HCDET_MODE_DS = 1 } hcdet_mode;
typedef enum hcdet_restore { HCDET_RESTORE_LP = 0, HCDET_RESTORE_QP = 1 } hcdet_restore;

typedef struct hcdet_params {
  int mode;    /* hcdet_mode */
  double mu_initial;
  double mu_shrink;
  double alpha;
  double deflation_threshold;
  double deletion_threshold;
  int restore; /* hcdet_restore */
  int upper_log;
  int drop_one_var;
  double mu_min;
  uint64_t seed;
  int max_iterations;
  double time_limit; /* seconds, <= 0 for none */
} hcdet_params;

typedef struct hcdet_bench_config {
  const int* sizes;
  size_t num_sizes;
  int count;
  int dmin;
  int dmax;
  int plant;
  const char* grid; /* "paper-def", "paper-nodef" or "paper-modes" */
  uint64_t seed;
  const char* out_dir;
  int threads; /* 0 = hardware concurrency */
  double time_limit;
} hcdet_bench_config;

typedef struct hcdet_graph hcdet_graph;
typedef struct hcdet_report hcdet_report;

/* Message of the last failed call on this thread ("" when none). */
HCDET_API const char* hcdet_last_error(void);

HCDET_API void hcdet_params_default(hcdet_params* p);

HCDET_API hcdet_status hcdet_graph_load(const char* path, hcdet_graph** out);
/* edges: 2*num_edges 0-based endpoints. */
HCDET_API hcdet_status hcdet_graph_from_edges(int n, const int* edges, size_t num_edges,
                                              hcdet_graph** out);
HCDET_API hcdet_status hcdet_graph_generate(int n, int dmin, int dmax, uint64_t seed, int plant,
                                            hcdet_graph** out);
HCDET_API hcdet_status hcdet_graph_save(const hcdet_graph* g, const char* path);
HCDET_API int hcdet_graph_nodes(const hcdet_graph* g);
HCDET_API size_t hcdet_graph_edges(const hcdet_graph* g);
/* Number of directed Hamiltonian cycles; HCDET_E_CAP when more than cap. */
HCDET_API hcdet_status hcdet_graph_count_hc(const hcdet_graph* g, size_t cap, size_t* count);
HCDET_API void hcdet_graph_free(hcdet_graph* g);

HCDET_API hcdet_status hcdet_solve(const hcdet_graph* g, const hcdet_params* p, hcdet_report** out);
HCDET_API hcdet_outcome hcdet_report_outcome(const hcdet_report* r);
HCDET_API const char* hcdet_outcome_name(hcdet_outcome o);
HCDET_API int hcdet_report_iterations(const hcdet_report* r);
HCDET_API int hcdet_report_deflations(const hcdet_report* r);
HCDET_API int hcdet_report_deletions(const hcdet_report* r);
HCDET_API double hcdet_report_wall_time(const hcdet_report* r);
/* Copies up to cap 1-based node labels; returns the cycle length (0 = none). */
HCDET_API size_t hcdet_report_cycle(const hcdet_report* r, int* nodes, size_t cap);
HCDET_API hcdet_status hcdet_report_write_trace(const hcdet_report* r, const char* path);
HCDET_API void hcdet_report_free(hcdet_report* r);

/* Objective profiles toward every Hamiltonian cycle, written as CSV. */
HCDET_API hcdet_status hcdet_paths(const hcdet_graph* g, int samples, size_t cap, const char* path);

HCDET_API hcdet_status hcdet_bench(const hcdet_bench_config* cfg);

#ifdef __cplusplus
}
#endif

#endif /* HCDET_H */

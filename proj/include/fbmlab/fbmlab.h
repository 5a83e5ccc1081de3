/* C interface to the fbmlab numerics core.
 *
 * Conventions: every function returns an fbmlab_status code; outputs go
 * through pointers. A failing call leaves outputs untouched and stores a
 * human-readable detail retrievable with fbmlab_last_error() on the same
 * thread. Heavy objects are opaque handles with explicit free functions;
 * report-shaped results are returned as JSON strings owned by the caller
 * (release with fbmlab_string_free).
 */
#ifndef FBMLAB_H
#define FBMLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FBMLAB_API __declspec(dllexport)
#else
#define FBMLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fbmlab_status {
  FBMLAB_OK = 0,
  FBMLAB_ERR_DOMAIN = 1,    /* invalid argument or parameter domain */
  FBMLAB_ERR_REGIME = 2,    /* parameters outside the operation's regime */
  FBMLAB_ERR_DIVERGENT = 3, /* requested value grows without bound */
  FBMLAB_ERR_NUMERIC = 4,   /* internal numerical failure */
  FBMLAB_ERR_IO = 5,
  FBMLAB_ERR_NULL = 6
} fbmlab_status;

FBMLAB_API const char* fbmlab_version(void);
FBMLAB_API const char* fbmlab_status_name(int status);
/* Detail message for the most recent failure on this thread. */
FBMLAB_API const char* fbmlab_last_error(void);
FBMLAB_API void fbmlab_string_free(char* s);

/* ---- scalar kernels -------------------------------------------------- */

FBMLAB_API int fbmlab_fbm_covariance(double s, double t, double hurst,
                                     double* out);
FBMLAB_API int fbmlab_increment_covariance(double s, double t, double s2,
                                           double t2, double hurst,
                                           double* out);
/* x points to d coordinates. */
FBMLAB_API int fbmlab_heat_kernel(const double* x, int d, double eps,
                                  double* out);
FBMLAB_API int fbmlab_mean_local_time(int d, double hurst, double horizon,
                                      double eps, double* out);
FBMLAB_API int fbmlab_mean_asymptotic(int d, double hurst, double horizon,
                                      double eps, double* out);
/* weight = exp(-g * value) with the exponent clamped to [-700, 700];
 * saturated (may be NULL) reports the clamp. */
FBMLAB_API int fbmlab_edwards_weight(double value, double g, double* weight,
                                     int* saturated);

/* ---- paths ------------------------------------------------------------ */

typedef struct fbmlab_path fbmlab_path;

enum { FBMLAB_GEN_DENSE = 0, FBMLAB_GEN_FAST = 1 };

FBMLAB_API int fbmlab_path_generate(int d, double hurst, double horizon, int n,
                                    uint64_t seed, uint64_t path_index,
                                    int method, fbmlab_path** out);
FBMLAB_API void fbmlab_path_free(fbmlab_path* path);
FBMLAB_API int fbmlab_path_size(const fbmlab_path* path, int* n, int* d);
/* (n+1) x d array, time-major; row k is the position at t_k. */
FBMLAB_API const double* fbmlab_path_values(const fbmlab_path* path);
FBMLAB_API int fbmlab_path_write_csv(const fbmlab_path* path, const char* file);
/* 32-byte header "FBMP" | version u8 | d u8 | n u16 | H f64 | T f64 |
 * seed u64, little-endian, then the values coordinate-major as f64. */
FBMLAB_API int fbmlab_path_write_binary(const fbmlab_path* path,
                                        const char* file);

/* Riemann estimate of the self-intersection local time of the path. */
FBMLAB_API int fbmlab_local_time(const fbmlab_path* path, double eps,
                                 double* value);

/* ---- deterministic quadrature ----------------------------------------- */

typedef struct fbmlab_quad_config {
  double rel_tol;
  long max_cells;
  double softening_exponent;
  double boundary_margin;
} fbmlab_quad_config;

FBMLAB_API int fbmlab_quad_config_default(fbmlab_quad_config* cfg);

typedef struct fbmlab_quad_result {
  double value;
  double abs_error;
  long cells;
  int converged;
  double region_t1, region_t2, region_t3;
} fbmlab_quad_result;

/* Covariance-difference functional E(eps, gamma); eps = gamma = 0 needs
 * dH < 3/2 and reports FBMLAB_ERR_DIVERGENT otherwise. cfg may be NULL. */
FBMLAB_API int fbmlab_compute_e(int d, double hurst, double horizon,
                                double eps, double gamma,
                                const fbmlab_quad_config* cfg,
                                fbmlab_quad_result* out);
/* Second moment of the approximated local time. */
FBMLAB_API int fbmlab_second_moment(int d, double hurst, double horizon,
                                    double eps, const fbmlab_quad_config* cfg,
                                    fbmlab_quad_result* out);

/* ---- report drivers (JSON out) ----------------------------------------
 * Ladder arrays are decreasing eps values. The experiment spec is a JSON
 * object: {"d", "H", "T", "eps", "grid_n", "n_paths", "g_list",
 * "center_mode": "none"|"quadrature_mean", "seed", "n_batches", "threads",
 * "method": "fast"|"dense"}; missing keys take defaults.
 */

FBMLAB_API int fbmlab_rate_curve_json(int d, double hurst, double horizon,
                                      const double* eps_ladder, int n_ladder,
                                      const fbmlab_quad_config* cfg,
                                      char** json_out);
FBMLAB_API int fbmlab_divergence_probe_json(int d, double hurst,
                                            double horizon, int max_level,
                                            const fbmlab_quad_config* cfg,
                                            char** json_out);
FBMLAB_API int fbmlab_mean_divergence_json(int d, double hurst, double horizon,
                                           const double* eps_ladder,
                                           int n_ladder, char** json_out);
FBMLAB_API int fbmlab_run_experiment_json(const char* spec_json,
                                          char** json_out);
FBMLAB_API int fbmlab_tail_probe_json(const char* spec_json,
                                      const double* thresholds, int n,
                                      char** json_out);
/* Full bound suite (integral inequality sweeps plus delta positivity). */
FBMLAB_API int fbmlab_verify_bounds_json(int d, double hurst, double horizon,
                                         long samples, uint64_t seed,
                                         char** json_out);

/* ---- acceptance -------------------------------------------------------
 * suite is "fast" or "full"; all_passed (may be NULL) is set to 0/1.
 * threads <= 0 selects hardware concurrency.
 */
FBMLAB_API int fbmlab_acceptance_json(const char* suite, int threads,
                                      char** json_out, int* all_passed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FBMLAB_H */

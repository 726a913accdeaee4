/* C interface to the vcate library.
 *
 * Every function returning int reports a vcate_status; on failure a
 * description of the most recent error on the calling thread is available
 * from vcate_last_error(). Strings returned through char** are owned by the
 * caller and released with vcate_string_free(). */
#ifndef VCATE_VCATE_H_
#define VCATE_VCATE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(VCATE_BUILDING_LIBRARY)
#define VCATE_API __attribute__((visibility("default")))
#else
#define VCATE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vcate_status {
  VCATE_OK = 0,
  VCATE_INVALID_ARGUMENT = 1,
  VCATE_INVALID_K = 2,
  VCATE_TOO_FEW_UNITS = 3,
  VCATE_OVERLAP_VIOLATION = 4,
  VCATE_NON_BINARY_TREATMENT = 5,
  VCATE_NON_FINITE_VALUE = 6,
  VCATE_EMPTY_ARM = 7,
  VCATE_SINGULAR_GRAM = 8,
  VCATE_SINGULAR_J = 9,
  VCATE_DEGENERATE_OMEGA11 = 10,
  VCATE_GRID_EXHAUSTED = 11,
  VCATE_PARSE_ERROR = 12,
  VCATE_CONFIG_ERROR = 13,
  VCATE_INTERNAL = 99
} vcate_status;

typedef struct vcate_dataset vcate_dataset;
typedef struct vcate_result vcate_result;
typedef struct vcate_experiment vcate_experiment;

/* Message for the last failed call on this thread ("" if none). */
VCATE_API const char* vcate_last_error(void);
VCATE_API const char* vcate_status_name(int status);
VCATE_API void vcate_string_free(char* s);

/* Copies the inputs. x is row-major n by p; cluster_id may be NULL. */
VCATE_API int vcate_dataset_create(const double* y, const int* d, const double* x,
                                   const double* pscore, const int64_t* cluster_id, size_t n,
                                   size_t p, vcate_dataset** out);
VCATE_API void vcate_dataset_destroy(vcate_dataset* ds);

/* Cross-fitted estimation. options_json is a JSON object with the keys
 * K, n_splits, alpha, seed, delta, threads, units, first_stage, lasso, grid
 * (all optional); NULL means defaults. */
VCATE_API int vcate_estimate(const vcate_dataset* ds, const char* options_json,
                             vcate_result** out);
VCATE_API int vcate_result_estimate_json(const vcate_result* r, char** out);
VCATE_API int vcate_result_test_json(const vcate_result* r, char** out);
VCATE_API void vcate_result_destroy(vcate_result* r);

VCATE_API int vcate_welfare_bounds(double ate, double vcate, double* simple, double* general);
/* Bound for the outcome k1 + k2 * Y given the moments of Y's CATE. */
VCATE_API int vcate_transform_bound(double ate, double vcate, double k1, double k2, double* out);
VCATE_API int vcate_adversarial_design(double ate, double vcate, double* p1, double* tau0,
                                       double* tau1);

VCATE_API int vcate_gchisq_cdf(double v, double nu1, double kappa1, double kappa2, double* out);
VCATE_API int vcate_gchisq_quantile(double u, double nu1, double kappa1, double kappa2,
                                    double* out);

/* Runs a simulation study described by config_json (see README). */
VCATE_API int vcate_experiment_run(const char* config_json, vcate_experiment** out);
VCATE_API int vcate_experiment_summary_csv(const vcate_experiment* e, char** out);
VCATE_API int vcate_experiment_draws_csv(const vcate_experiment* e, char** out);
VCATE_API int vcate_experiment_summary_json(const vcate_experiment* e, char** out);
VCATE_API void vcate_experiment_destroy(vcate_experiment* e);

#ifdef __cplusplus
}
#endif

#endif /* VCATE_VCATE_H_ */

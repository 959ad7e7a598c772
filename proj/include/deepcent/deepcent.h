/* deepcent C API: opaque handles over the survival-time prediction core.
 *
 * Every fallible call returns a dc_status; on failure dc_last_error() holds
 * a thread-local message describing what went wrong. Handles are created by
 * the library and released with the matching *_free function.
 */
#ifndef DEEPCENT_H
#define DEEPCENT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
  DC_OK = 0,
  DC_ERR_CONFIG = 1, /* invalid configuration or usage */
  DC_ERR_DATA = 2,   /* parse, shape, or file errors */
  DC_ERR_NUMERIC = 3 /* numerical or training failures */
} dc_status;

typedef enum dc_mode { DC_MODE_SINGLE = 1, DC_MODE_COMPETING = 2 } dc_mode;

const char* dc_version(void);

/* Message for the most recent failing call on this thread. */
const char* dc_last_error(void);

/* ---------- datasets ---------- */

typedef struct dc_dataset dc_dataset;

dc_status dc_dataset_load_csv(const char* path, dc_dataset** out);
dc_status dc_dataset_save_csv(const dc_dataset* ds, const char* path);
dc_status dc_dataset_load_truth_csv(dc_dataset* ds, const char* path);
dc_status dc_dataset_save_truth_csv(const dc_dataset* ds, const char* path);
void dc_dataset_free(dc_dataset* ds);

int dc_dataset_size(const dc_dataset* ds);
int dc_dataset_covariates(const dc_dataset* ds);
dc_mode dc_dataset_mode(const dc_dataset* ds);
int dc_dataset_has_truth(const dc_dataset* ds);

dc_status dc_dataset_split(const dc_dataset* ds, double fraction, long long seed,
                           dc_dataset** train, dc_dataset** test);

/* ---------- simulation ---------- */

typedef struct dc_sim_config {
  int n;
  double base_rate;        /* lambda, default 2 */
  const double* beta;      /* quadratic log-risk coefficients; NULL -> (5,-5,2,-2) */
  int n_beta;
  double group_multiplier; /* kappa, default 2 */
  double theta;            /* censoring upper bound */
  long long seed;
} dc_sim_config;

typedef struct dc_cr_sim_config {
  int n;
  double rate1;            /* default 2 */
  double rate2;            /* default 4 */
  const double* beta;      /* three coefficients; NULL -> (5,-5,2) */
  int n_beta;
  double group_multiplier; /* applies to cause-1 times only */
  double theta;
  long long seed;
} dc_cr_sim_config;

dc_status dc_simulate_single(const dc_sim_config* config, dc_dataset** out);
dc_status dc_simulate_competing(const dc_cr_sim_config* config, dc_dataset** out);

/* Bisection on theta until the Monte Carlo censoring estimate is within
 * `tolerance` of `target`; config->theta is ignored. */
dc_status dc_calibrate_theta_single(const dc_sim_config* config, double target,
                                    double tolerance, double* theta_out);
dc_status dc_calibrate_theta_competing(const dc_cr_sim_config* config, double target,
                                       double tolerance, double* theta_out);

/* ---------- models ---------- */

typedef struct dc_model dc_model;

typedef struct dc_train_config {
  const int* hidden; /* hidden layer widths */
  int n_hidden;
  double dropout;
  int epochs;
  double learning_rate;
  double lambda1; /* censoring-penalty weight */
  double lambda2; /* ranking-loss weight */
  int rank_loss;  /* 0 = concordance lower bound, 1 = pairwise time MSE */
  long long seed;
} dc_train_config;

typedef struct dc_cr_train_config {
  const int* shared; /* shared trunk widths */
  int n_shared;
  const int* head; /* cause-specific head widths; may be empty */
  int n_head;
  double dropout;
  int epochs;
  double learning_rate;
  double lambda0, lambda1, lambda2, lambda3, lambda4;
  long long seed;
} dc_cr_train_config;

dc_status dc_train_single(const dc_dataset* ds, const dc_train_config* config,
                          dc_model** out);
dc_status dc_train_competing(const dc_dataset* ds, const dc_cr_train_config* config,
                             dc_model** out);

dc_status dc_model_save(const dc_model* model, const char* path);
dc_status dc_model_load(const char* path, dc_model** out);
void dc_model_free(dc_model* model);
dc_mode dc_model_mode(const dc_model* model);

/* Copies up to `cap` per-epoch training losses into `out`; *n_out receives
 * the full trace length. */
dc_status dc_model_loss_trace(const dc_model* model, double* out, int cap, int* n_out);

/* ---------- prediction ---------- */

/* yhat1 must hold dc_dataset_size(ds) doubles; yhat2 likewise for competing
 * models and must be NULL for single-risk models. */
dc_status dc_predict(const dc_model* model, const dc_dataset* ds, double* yhat1,
                     double* yhat2);

/* Per-row Monte Carlo dropout intervals (row i uses seed + i). alpha is the
 * tail mass, e.g. 0.05 for 95% intervals. lower2/upper2 must be NULL for
 * single-risk models. */
dc_status dc_predict_interval(const dc_model* model, const dc_dataset* ds, int n_draws,
                              double alpha, long long seed, double* lower1, double* upper1,
                              double* lower2, double* upper2);

/* ---------- evaluation ---------- */

typedef struct dc_eval_report {
  int n;
  int mse_uses_truth;
  /* index 0 = cause 1 (or the single risk), index 1 = cause 2 */
  double c_index[2];
  int c_index_defined[2];
  double mse[2];
  int mse_defined[2];
  long long comparable_pairs[2];
  long long events[2];
} dc_eval_report;

dc_status dc_evaluate(const dc_dataset* ds, const double* yhat1, const double* yhat2,
                      dc_eval_report* out);

/* ---------- tuning ---------- */

/* Width options are flattened: option i spans widths_flat[offsets[i]] ..
 * widths_flat[offsets[i+1]-1], with n+1 offsets. Any NULL list falls back to
 * the built-in default for the dataset mode. */
typedef struct dc_grid {
  const int* hidden_flat;
  const int* hidden_offsets;
  int n_hidden;
  const int* shared_flat;
  const int* shared_offsets;
  int n_shared;
  const int* head_flat;
  const int* head_offsets;
  int n_head;
  const double* dropout;
  int n_dropout;
  const int* epochs;
  int n_epochs;
  const double* learning_rate;
  int n_learning_rate;
  const double* lambda0;
  int n_lambda0;
  const double* lambda1;
  int n_lambda1;
  const double* lambda2;
  int n_lambda2;
  const double* lambda3;
  int n_lambda3;
  const double* lambda4;
  int n_lambda4;
} dc_grid;

/* Full Cartesian size of the grid (with defaults filled in); -1 on error. */
long long dc_tune_grid_size(const dc_grid* grid, dc_mode mode);

/* k-fold cross-validated grid search. Writes one CSV row per evaluated
 * config to report_csv_path and the winning configuration as JSON into
 * best_json (truncated to cap). budget <= 0 evaluates the whole grid. */
dc_status dc_tune(const dc_dataset* ds, const dc_grid* grid, int k, long long seed,
                  int budget, const char* report_csv_path, char* best_json, size_t cap);

/* ---------- benchmark ---------- */

typedef struct dc_benchmark_config {
  dc_mode mode;
  int n;            /* training size; tests use n/2 */
  double censoring; /* target proportion, theta calibrated once */
  int replicates;
  long long seed;
  const char* methods; /* comma-separated; NULL -> all methods for the mode */
} dc_benchmark_config;

/* Runs the replicated simulation study and writes the long-format results
 * CSV (replicate,method,metric,value). */
dc_status dc_benchmark(const dc_benchmark_config* config, const char* out_csv_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DEEPCENT_H */

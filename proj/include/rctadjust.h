/*
 * rctadjust — covariate-adjusted treatment-effect estimation for two-arm
 * randomized trials with continuous outcomes, plus a Monte Carlo study
 * engine over a built-in synthetic trial generator.
 *
 * Conventions:
 *   - Every fallible function returns an rcta_status; RCTA_OK is success.
 *   - On failure, rcta_last_error() returns a thread-local message
 *     describing the most recent failure in the calling thread.
 *   - Objects returned through out-parameters are owned by the caller and
 *     released with the matching *_free function. Out-parameters are left
 *     untouched on failure.
 *   - All estimation is deterministic given the inputs and the seed.
 */
#ifndef RCTADJUST_H
#define RCTADJUST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rcta_status {
  RCTA_OK = 0,
  RCTA_ERR_IO = 1,               /* file missing/unreadable/unwritable */
  RCTA_ERR_PARSE = 2,            /* malformed CSV or JSON */
  RCTA_ERR_INVALID_ARGUMENT = 3, /* bad handle, option, or schema */
  RCTA_ERR_SINGULAR_DESIGN = 4,  /* unrecoverable rank deficiency */
  RCTA_ERR_ESTIMATION = 5,       /* data unusable for the estimator */
  RCTA_ERR_INTERNAL = 6,         /* unexpected condition */
} rcta_status;

/* Library semantic version, e.g. "0.1.0". Static storage; do not free. */
const char* rcta_version(void);

/* Thread-local message for the most recent failure in this thread; the
 * empty string when nothing failed yet. The pointer stays valid until the
 * next failing rctadjust call in the same thread. Do not free. */
const char* rcta_last_error(void);

/* ---------------------------------------------------------------- data - */

/* A dataset handle holds one of:
 *   - a trial sample        (columns y, a, w1..wp),
 *   - a historical sample   (columns y, w1..wp; every unit untreated),
 *   - an augmented trial    (trial columns plus u, y0, y1, m0, m1 as
 *     written by rcta_dump_dgp; usable wherever a trial is, and required
 *     by the "oracle" estimator). */
typedef struct rcta_dataset rcta_dataset;

rcta_status rcta_trial_from_csv(const char* path, rcta_dataset** out);
rcta_status rcta_historical_from_csv(const char* path, rcta_dataset** out);
rcta_status rcta_augmented_from_csv(const char* path, rcta_dataset** out);

/* Builds a trial dataset from arrays: y and a have n entries, w is
 * row-major n x p. Treatment a must be 0/1 with both arms present. */
rcta_status rcta_trial_from_arrays(const double* y, const double* a,
                                   const double* w, size_t n, size_t p,
                                   rcta_dataset** out);
/* Builds a historical (control-only) dataset from arrays. */
rcta_status rcta_historical_from_arrays(const double* y, const double* w,
                                        size_t n, size_t p,
                                        rcta_dataset** out);

rcta_status rcta_dataset_rows(const rcta_dataset* dataset, size_t* out);
rcta_status rcta_dataset_covariates(const rcta_dataset* dataset, size_t* out);
void rcta_dataset_free(rcta_dataset* dataset);

/* ---------------------------------------------------------- estimation - */

typedef struct rcta_result rcta_result;

/* Runs one estimator on a trial (or augmented) dataset.
 *
 * `historical` is required by estimator "prog-historical" and ignored
 * otherwise; pass NULL when unused.
 *
 * `options_json` selects and tunes the estimator:
 *   {
 *     "estimator": "unadjusted" | "ancova" | "prog-historical" |
 *                  "within-trial" | "tmle" | "tmle-linear" | "oracle",
 *     "alpha": 0.05,             // CI/test level
 *     "seed": 12345,             // drives fold splits and learner fits
 *     "cross_fit_folds": 10,     // own-trial cross-fitting
 *     "sl_folds": 10,            // model-selection cross-validation
 *     "learners": [ {"name": "...", "hyperparameters": {...}}, ... ],
 *     "score_only": false,       // within-trial: drop raw covariates
 *     "raw_covariates": false,   // prog-historical: adjust for the raw
 *                                //   covariates alongside the score
 *     "force_additive": false    // tmle: additive update even when the
 *                                //   realized arms are unbalanced
 *   }
 * Every key except "estimator" is optional. "oracle" requires an augmented
 * dataset. Identical inputs and options give bit-identical results. */
rcta_status rcta_estimate(const rcta_dataset* trial,
                          const rcta_dataset* historical,
                          const char* options_json, rcta_result** out);

/* Reads one numeric field: psi_hat, psi1_hat, psi0_hat, se, ci_lower,
 * ci_upper, p_value, or alpha. */
rcta_status rcta_result_value(const rcta_result* result, const char* field,
                              double* out);
/* Serializes the full result (estimate, interval, p-value, diagnostics) as
 * pretty-printed JSON. Free with rcta_string_free. */
rcta_status rcta_result_json(const rcta_result* result, char** out);
void rcta_result_free(rcta_result* result);

/* ------------------------------------------------------------- studies - */

/* Runs a Monte Carlo study and writes its metrics table as CSV.
 *
 * `kind` is "scenario" (one row per scenario x estimator) or "sweep" (one
 * row per trial size x estimator; a missing/empty "sweep_n" uses the
 * default grid 50..200 by 10 then 225..400 by 25, with historical size
 * fixed at ten times the trial size).
 *
 * `plan_json` keys (all optional): scenarios (array of {effect:
 * "homogeneous"|"heterogeneous", shift: "none"|"obs-small"|"obs-large"|
 * "unobs-small"|"unobs-large", n, n_hist}), estimators, reps, master_seed,
 * alpha, sweep_n, workers, learners, sl_folds, cross_fit_folds.
 *
 * `svg_path` (nullable) additionally writes a two-panel line chart: SE
 * panels for scenario studies, power/coverage panels for sweeps. Output is
 * byte-identical across runs and worker counts. */
rcta_status rcta_run_study(const char* kind, const char* plan_json,
                           const char* csv_path, const char* svg_path);

/* Samples one synthetic trial (written as an augmented trial CSV, truth
 * columns included) and, when `historical_csv_path` is non-NULL, one
 * historical control sample. `scenario_json` keys (all optional): effect,
 * shift, n, n_hist as above. */
rcta_status rcta_dump_dgp(const char* scenario_json, uint64_t seed,
                          const char* trial_csv_path,
                          const char* historical_csv_path);

/* Frees strings returned through char** out-parameters. */
void rcta_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* RCTADJUST_H */

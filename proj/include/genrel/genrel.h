/* genrel: semiparametric estimation of genetic covariance and correlation.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed through these functions; every fallible call returns a
 * genrel_status and leaves a human-readable message in genrel_last_error()
 * (thread-local) on failure.
 */
#ifndef GENREL_GENREL_H
#define GENREL_GENREL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum genrel_status {
  GENREL_OK = 0,
  GENREL_ERR_INVALID_ARGUMENT,
  GENREL_ERR_EMPTY_DATASET,
  GENREL_ERR_RAGGED_ROWS,
  GENREL_ERR_NO_TRAIT_OBSERVED,
  GENREL_ERR_NON_FINITE_VALUE,
  GENREL_ERR_TOO_FEW_OBSERVATIONS,
  GENREL_ERR_MISMATCHED_PLAN,
  GENREL_ERR_FOLD_LEAKAGE,
  GENREL_ERR_EMPTY_FOLD,
  GENREL_ERR_DEGENERATE_RESPONSE,
  GENREL_ERR_TOO_FEW_ROWS,
  GENREL_ERR_SINGULAR_SYSTEM,
  GENREL_ERR_NON_FINITE_LOSS,
  GENREL_ERR_DIMENSION_MISMATCH,
  GENREL_ERR_NON_POSITIVE_GENETIC_VARIANCE,
  GENREL_ERR_DEGENERATE_VARIANCE,
  GENREL_ERR_OUT_OF_RANGE,
  GENREL_ERR_BAD_SPEC,
  GENREL_ERR_HEADER_MISMATCH,
  GENREL_ERR_INCONSISTENT_INDICATOR,
  GENREL_ERR_NON_NUMERIC_CELL,
  GENREL_ERR_CONFIG,
  GENREL_ERR_IO,
  GENREL_ERR_SERIALIZATION_INVARIANT,
  GENREL_ERR_ALL_REPLICATIONS_FAILED,
  GENREL_ERR_UNSUPPORTED,
  GENREL_ERR_INTERNAL
} genrel_status;

const char* genrel_version(void);
const char* genrel_status_name(genrel_status status);
/* Message from the most recent failing call on this thread. */
const char* genrel_last_error(void);

/* ---- datasets ------------------------------------------------------- */

typedef struct genrel_dataset genrel_dataset;

/* x is row-major n*p. y/z may be NULL when that trait is never observed;
 * t_y/t_z are 0/1 masks and may be NULL meaning "observed wherever the value
 * array is non-NULL". */
genrel_status genrel_dataset_create(const double* x, int64_t n, int64_t p,
                                    const double* y, const uint8_t* t_y,
                                    const double* z, const uint8_t* t_z,
                                    genrel_dataset** out);
genrel_status genrel_dataset_from_csv(const char* path, genrel_dataset** out);
void genrel_dataset_free(genrel_dataset* dataset);

int64_t genrel_dataset_rows(const genrel_dataset* dataset);
int64_t genrel_dataset_cols(const genrel_dataset* dataset);
int64_t genrel_dataset_count_y(const genrel_dataset* dataset);
int64_t genrel_dataset_count_z(const genrel_dataset* dataset);
int64_t genrel_dataset_count_overlap(const genrel_dataset* dataset);

/* ---- run options ----------------------------------------------------- */

typedef struct genrel_options genrel_options;

genrel_status genrel_options_create(genrel_options** out);
void genrel_options_free(genrel_options* options);
/* Load a sectioned config file, or a named preset when the path does not
 * exist, on top of the current settings. */
genrel_status genrel_options_load(genrel_options* options, const char* path_or_preset);
/* Set one dotted key, e.g. ("run.alpha", "0.05") or ("learner_m.kind", "mlp"). */
genrel_status genrel_options_set(genrel_options* options, const char* dotted_key,
                                 const char* value);
/* Configured run.out path, or NULL when none was set. Owned by the options. */
const char* genrel_options_out_path(const genrel_options* options);

/* Materialize the configured data source: reads the CSV at data.path, or
 * draws one dataset from the configured DGP. */
genrel_status genrel_load_data(const genrel_options* options, genrel_dataset** out);

/* ---- estimation ------------------------------------------------------ */

typedef struct genrel_report genrel_report;

/* Cross-fitted estimate with confidence interval; target/learners/links come
 * from the options. */
genrel_status genrel_estimate(const genrel_dataset* dataset, const genrel_options* options,
                              genrel_report** out);
/* No-split point estimators: method is "fullsample" or "naive". */
genrel_status genrel_estimate_point(const genrel_dataset* dataset,
                                    const genrel_options* options, const char* method,
                                    double* out);
void genrel_report_free(genrel_report* report);

double genrel_report_point(const genrel_report* report);
double genrel_report_se(const genrel_report* report);
double genrel_report_ci_lower(const genrel_report* report);
double genrel_report_ci_upper(const genrel_report* report);
double genrel_report_alpha(const genrel_report* report);
/* "point +/- z*se [lower, upper]"; pointer owned by the report. */
const char* genrel_report_summary(const genrel_report* report);
genrel_status genrel_report_write(const genrel_report* report, const char* path);

/* ---- simulation lab -------------------------------------------------- */

typedef struct genrel_mc_table genrel_mc_table;

/* Monte Carlo study of the configured estimator on the configured DGP. */
genrel_status genrel_simulate(const genrel_options* options, genrel_mc_table** out);
void genrel_mc_table_free(genrel_mc_table* table);

double genrel_mc_table_cp(const genrel_mc_table* table);        /* <0 when no CI */
double genrel_mc_table_bias(const genrel_mc_table* table);
double genrel_mc_table_rbias(const genrel_mc_table* table);     /* <0 when truth is 0 */
double genrel_mc_table_len(const genrel_mc_table* table);       /* <0 when no CI */
double genrel_mc_table_se(const genrel_mc_table* table);        /* <0 when no CI */
double genrel_mc_table_mc_sd(const genrel_mc_table* table);
double genrel_mc_table_truth(const genrel_mc_table* table);
int64_t genrel_mc_table_reps(const genrel_mc_table* table);
int64_t genrel_mc_table_failures(const genrel_mc_table* table);
/* Delimited text rendering; pointer owned by the table. */
const char* genrel_mc_table_text(const genrel_mc_table* table);
genrel_status genrel_mc_table_write(const genrel_mc_table* table, const char* path);

/* Brute-force Monte Carlo oracle for the configured DGP's true target value.
 * draws <= 0 uses the configured run.draws. */
genrel_status genrel_oracle(const genrel_options* options, int64_t draws, double* truth,
                            double* mc_se);

#ifdef __cplusplus
}
#endif

#endif /* GENREL_GENREL_H */

/* C interface to the fairness-audit core.
 *
 * Every function that can fail returns an int error code (FA_OK == 0 on
 * success); fa_last_error() holds the matching message for the calling
 * thread.  Objects returned through fa_*_create/solve are owned by the
 * caller and released with the matching fa_*_free.
 */
#ifndef FAIRAUDIT_H
#define FAIRAUDIT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
    FA_OK = 0,
    FA_EMPTY_SUPPORT = 1,
    FA_NEGATIVE_WEIGHT = 2,
    FA_ZERO_TOTAL_MASS = 3,
    FA_SUPPORT_MISMATCH = 4,
    FA_ABSOLUTE_CONTINUITY_VIOLATION = 5,
    FA_INVALID_ALPHA = 6,
    FA_ZERO_VARIANCE = 7,
    FA_EPSILON_TOO_LARGE = 8,
    FA_INFEASIBLE_DIRECTION = 9,
    FA_ZERO_OUTPUT_MASS = 10,
    FA_DEGENERATE_OUTPUT = 11,
    FA_INDEPENDENT_CHANNEL = 12,
    FA_DEGENERATE_OBJECTIVE = 13,
    FA_DEGENERATE_POSTERIOR = 14,
    FA_MISSING_FEATURE_VECTORS = 15,
    FA_UNSUPPORTED_OUTPUT_ALPHABET = 16,
    FA_INVALID_ARGUMENT = 17,
    FA_MISSING_COLUMN = 18,
    FA_UNMAPPABLE_CATEGORY = 19,
    FA_EMPTY_AFTER_FILTERING = 20,
    FA_EMPTY_GROUP = 21,
    FA_PERFECT_SEPARATION = 22,
    FA_UNKNOWN_CELL = 23,
    FA_DEGENERATE_SAMPLE = 24,
    FA_MALFORMED_SCHEDULE = 25,
    FA_IO_ERROR = 26,
    FA_INTERNAL = 27
};

/* Library version string, static storage. */
const char* fa_version(void);

/* Stable name for an error code ("Ok", "InvalidArgument", ...). */
const char* fa_error_name(int code);

/* Nonzero when the code signals a malformed request rather than a data or
 * numeric condition; CLI front ends map these to usage exits. */
int fa_error_is_usage(int code);

/* Message from the most recent failing call on this thread; empty string
 * after a success.  Valid until the thread's next fairaudit call. */
const char* fa_last_error(void);

/* ---- audit context: group-conditional input laws plus a channel ---- */

typedef struct fa_context fa_context;

/* input_labels/output_labels may be NULL for auto-generated names.
 * channel_row_major holds n_inputs rows of n_outputs transition weights.
 * On failure returns NULL and, when err is non-NULL, stores the code. */
fa_context* fa_context_create(size_t n_inputs, const char* const* input_labels,
                              const double* p0_weights, const double* p1_weights,
                              size_t n_outputs, const char* const* output_labels,
                              const double* channel_row_major, int* err);
void fa_context_free(fa_context* ctx);
size_t fa_context_input_size(const fa_context* ctx);
size_t fa_context_output_size(const fa_context* ctx);

/* ---- divergences on raw weight vectors (normalized internally) ---- */

int fa_kl_divergence(const double* p, const double* q, size_t n, double* out);
int fa_renyi_divergence(double alpha, const double* p, const double* q, size_t n,
                        double* out);
int fa_total_variation(const double* p, const double* q, size_t n, double* out);

/* ---- first-order objective response ---- */

/* lambda points at 4 nonnegative weights.  f holds one value per input atom
 * and must have zero mean under the group-0 law. */
int fa_delta_lambda(const fa_context* ctx, const double* lambda, const double* f,
                    double* out);

/* ---- closed-form steepest-descent correction ---- */

typedef struct fa_correction fa_correction;

fa_correction* fa_correction_solve(const fa_context* ctx, const double* lambda,
                                   int* err);
void fa_correction_free(fa_correction* corr);
double fa_correction_delta(const fa_correction* corr);
/* buf receives one value per input atom. */
int fa_correction_f_star(const fa_correction* corr, double* buf);
int fa_correction_f_l(const fa_correction* corr, double* buf);
/* Any output pointer may be NULL.  rho_m is 0 when the channel carries no
 * dependence (independent-channel fallback); independent is set to 1 then. */
int fa_correction_coefficients(const fa_correction* corr, double* a1, double* a2,
                               double* b1, double* rho_m, double* n_l, double* n_m,
                               int* independent);

/* ---- global objective minimizer for one weight vector ---- */

/* qx_buf receives the minimizing input law (one mass per atom); any other
 * output pointer may be NULL. */
int fa_solve_path_point(const fa_context* ctx, const double* lambda, double* qx_buf,
                        double* objective, long* iterations, int* converged,
                        int* non_unique);

/* ---- dataset-level drivers (emit report files into out_dir) ---- */

/* channel_source is "model" or "empirical" (NULL means "model");
 * cells_override may be NULL.  lambda points at 4 weights. */
int fa_run_audit(const char* data_csv, const char* schema_json, const double* lambda,
                 double smooth, const char* channel_source, const char* cells_override,
                 const char* out_dir);

/* Exactly one of (data_csv + schema_json) or context_json may be given;
 * unused paths are NULL. */
int fa_run_path(const char* data_csv, const char* schema_json, const char* context_json,
                const char* schedule_file, double smooth, const char* channel_source,
                const char* cells_override, const char* out_dir);

/* Runs the built-in numeric cross-checks, writing a JSON summary to out_path
 * (NULL means stdout).  failures receives the number of failing checks when
 * non-NULL.  The return code reflects I/O or internal faults, not check
 * failures. */
int fa_run_selftest(const char* out_path, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* FAIRAUDIT_H */

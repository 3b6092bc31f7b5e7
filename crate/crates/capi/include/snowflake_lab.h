#ifndef SNOWFLAKE_LAB_H
#define SNOWFLAKE_LAB_H

/* Generated by cbindgen from the snowflake-lab-capi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum SnowlabStatus {
  SNOWLAB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SNOWLAB_STATUS_NULL_ARGUMENT = 1,
  /**
   * Malformed or rejected input (shape, axioms, parse failures).
   */
  SNOWLAB_STATUS_INVALID_INPUT = 2,
  /**
   * Argument outside an operation's mathematical domain.
   */
  SNOWLAB_STATUS_DOMAIN = 3,
  /**
   * A threshold does not exist for the supplied function.
   */
  SNOWLAB_STATUS_THRESHOLD = 4,
  /**
   * A search range was exhausted or a segment was too short.
   */
  SNOWLAB_STATUS_SEARCH = 5,
  /**
   * An iterative solver hit its iteration cap.
   */
  SNOWLAB_STATUS_ITERATION_LIMIT = 6,
  /**
   * The norm or dimension is outside the supported family.
   */
  SNOWLAB_STATUS_UNSUPPORTED = 7,
  /**
   * Internal failure (a panic was caught).
   */
  SNOWLAB_STATUS_INTERNAL = 8,
} SnowlabStatus;

/**
 * Opaque snowflaking-function handle.
 */
typedef struct SnowlabFunction SnowlabFunction;

/**
 * Opaque finite metric space handle.
 */
typedef struct SnowlabMetric SnowlabMetric;

/**
 * Opaque norm handle.
 */
typedef struct SnowlabNorm SnowlabNorm;

/**
 * Flat validation result for C callers.
 */
typedef struct SnowlabValidation {
  /**
   * 1 when all metric axioms hold at the tolerance.
   */
  int32_t is_metric;
  /**
   * 1 when a worst triangle exists (3 or more points).
   */
  int32_t has_worst_triangle;
  uintptr_t worst_i;
  uintptr_t worst_j;
  uintptr_t worst_k;
  /**
   * d(i,j) + d(j,k) - d(i,k) at the global minimizer.
   */
  double worst_slack;
  double worst_symmetry_gap;
} SnowlabValidation;

/**
 * Axiom flags; each field is 1 (holds), 0 (fails), or -1 (undetermined at
 * probe resolution).
 */
typedef struct SnowlabAxioms {
  int32_t s1;
  int32_t s2;
  int32_t s3;
  int32_t s4;
} SnowlabAxioms;

/**
 * A violated triangle after pulling a metric back through h^{-1}.
 */
typedef struct SnowlabViolation {
  /**
   * 1 when the pullback violated the triangle inequality (then the
   * remaining fields are meaningful and no metric handle is produced).
   */
  int32_t violated;
  uintptr_t via;
  uintptr_t i;
  uintptr_t k;
  double d_ik;
  double d_ij;
  double d_jk;
  double slack;
} SnowlabViolation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *snowlab_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *snowlab_version(void);

/**
 * Release a string returned through a `char**` out-parameter.
 *
 * # Safety
 * `s` must have been produced by this library and not freed before.
 */
void snowlab_string_free(char *s);

/**
 * Build a metric from an n x n row-major distance matrix. Returns null and
 * sets the thread-local error on structural problems.
 *
 * # Safety
 * `dist` must point to `n * n` readable doubles.
 */
struct SnowlabMetric *snowlab_metric_new(uintptr_t n, const double *dist);

/**
 * Parse a metric from JSON in the `snowflake-lab/1` schema.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string.
 */
struct SnowlabMetric *snowlab_metric_from_json(const char *text);

/**
 * # Safety
 * `m` must be a live handle from this library (or null, a no-op).
 */
void snowlab_metric_free(struct SnowlabMetric *m);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
uintptr_t snowlab_metric_size(const struct SnowlabMetric *m);

/**
 * Read one distance.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_metric_distance(const struct SnowlabMetric *m,
                                           uintptr_t i,
                                           uintptr_t j,
                                           double *out);

/**
 * Serialize a metric to JSON (`snowflake-lab/1`).
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable. Free the result with
 * [`snowlab_string_free`].
 */
enum SnowlabStatus snowlab_metric_to_json(const struct SnowlabMetric *m, char **out);

/**
 * Validate the metric axioms at an absolute tolerance.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_metric_validate(const struct SnowlabMetric *m,
                                           double tol,
                                           struct SnowlabValidation *out);

/**
 * t^alpha for alpha in (0, 1].
 */
struct SnowlabFunction *snowlab_h_power(double alpha);

/**
 * linear * t + sqrt_coeff * sqrt(t).
 */
struct SnowlabFunction *snowlab_h_linear_plus_sqrt(double linear, double sqrt_coeff);

/**
 * Parse an expression (`t^0.5`, `t+sqrt(t)`, ...) or JSON document.
 *
 * # Safety
 * `spec` must be a valid NUL-terminated string.
 */
struct SnowlabFunction *snowlab_h_parse(const char *spec);

/**
 * # Safety
 * `h` must be a live handle from this library (or null, a no-op).
 */
void snowlab_h_free(struct SnowlabFunction *h);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_h_eval(const struct SnowlabFunction *h, double t, double *out);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_h_inverse(const struct SnowlabFunction *h, double y, double *out);

/**
 * The limit of h(t)/t at infinity (0 exactly when the decay axiom holds).
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_h_modulus_limit(const struct SnowlabFunction *h, double *out);

/**
 * Least S such that h(S + t) <= h(S) + h(t)/2 for all larger S.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_h_threshold_t(const struct SnowlabFunction *h, double t, double *out);

/**
 * Greatest t0 <= S such that the halving bound holds for all 0 < t <= t0.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_h_threshold_t_tilde(const struct SnowlabFunction *h,
                                               double s,
                                               double *out);

/**
 * Decide the snowflaking axioms S1-S4.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_h_check_axioms(const struct SnowlabFunction *h,
                                          struct SnowlabAxioms *out);

/**
 * Entrywise h on the off-diagonal distances; returns a new metric handle.
 *
 * # Safety
 * `m` and `h` must be live handles.
 */
struct SnowlabMetric *snowlab_metric_snowflake(const struct SnowlabMetric *m,
                                               const struct SnowlabFunction *h);

/**
 * Entrywise h^{-1}. With `require_metric` nonzero the result is validated:
 * either `*out_metric` receives a handle, or `out_violation.violated` is
 * set with the witnessing triple.
 *
 * # Safety
 * `m` and `h` must be live handles; `out_metric` and `out_violation` must
 * be writable.
 */
enum SnowlabStatus snowlab_metric_desnowflake(const struct SnowlabMetric *m,
                                              const struct SnowlabFunction *h,
                                              int32_t require_metric,
                                              struct SnowlabMetric **out_metric,
                                              struct SnowlabViolation *out_violation);

/**
 * Minimal Euclidean embedding dimension; -1 when the metric does not embed
 * isometrically in any Euclidean space.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum SnowlabStatus snowlab_metric_min_dim(const struct SnowlabMetric *m, int64_t *out);

/**
 * Full embedding report (eigenvalues, minimal dimension, residual,
 * coordinates) as JSON.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable. Free the result with
 * [`snowlab_string_free`].
 */
enum SnowlabStatus snowlab_metric_embed_json(const struct SnowlabMetric *m, char **out);

/**
 * l_p norm; pass INFINITY for the sup norm.
 */
struct SnowlabNorm *snowlab_norm_lp(double p, uintptr_t dim);

/**
 * Parse a norm from JSON (`snowflake-lab/1` tagged union).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string.
 */
struct SnowlabNorm *snowlab_norm_from_json(const char *text);

/**
 * # Safety
 * `n` must be a live handle from this library (or null, a no-op).
 */
void snowlab_norm_free(struct SnowlabNorm *n);

/**
 * Search a claimed isometric image of a power snowflake for a refuting
 * triple. `points` is row-major `n_points x dim`; `norm` may be null for
 * the Euclidean norm. On success `*out_refuted` is 1 when a certificate
 * was found, and `*out_json` carries the certificate (or the
 * no-refutation outcome) in the `snowflake-lab/1` schema.
 *
 * # Safety
 * `points` must hold `n_points * dim` doubles; `out_refuted` and
 * `out_json` must be writable; `norm` must be live or null.
 */
enum SnowlabStatus snowlab_refute_alpha(const double *points,
                                        uintptr_t n_points,
                                        uintptr_t dim,
                                        double alpha,
                                        const struct SnowlabNorm *norm,
                                        int32_t *out_refuted,
                                        char **out_json);

/**
 * General-h counterpart of [`snowlab_refute_alpha`]; `mode` is 0 for the
 * unbounded witness spacing, 1 for the accumulation spacing.
 *
 * # Safety
 * As for [`snowlab_refute_alpha`]; `h` must be a live handle.
 */
enum SnowlabStatus snowlab_refute_h(const double *points,
                                    uintptr_t n_points,
                                    uintptr_t dim,
                                    const struct SnowlabFunction *h,
                                    int32_t mode,
                                    const struct SnowlabNorm *norm,
                                    int32_t *out_refuted,
                                    char **out_json);

/**
 * Build and verify the planar spiral for a gauge failing the decay axiom;
 * the verified construction (steps, points, verification summary) is
 * returned as JSON.
 *
 * # Safety
 * `h` must be a live handle; `out_json` must be writable.
 */
enum SnowlabStatus snowlab_spiral_build(const struct SnowlabFunction *h,
                                        uintptr_t count,
                                        char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SNOWFLAKE_LAB_H */

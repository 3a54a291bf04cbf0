#ifndef SANDWICH_FORMS_H
#define SANDWICH_FORMS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Boundary data for [`sf_interval_laplacian`].
 */
typedef enum {
  SF_BOUNDARY_DIRICHLET = 0,
  SF_BOUNDARY_NEUMANN = 1,
  SF_BOUNDARY_ROBIN = 2,
} SfBoundary;

/**
 * Sandwich clause that failed, or `None`.
 */
typedef enum {
  SF_CLAUSE_NONE = -1,
  SF_CLAUSE_ORDER_IDEAL = 0,
  SF_CLAUSE_POSITIVE = 1,
  SF_CLAUSE_LOCAL = 2,
  SF_CLAUSE_EXTENSION = 3,
  SF_CLAUSE_KILLING_BAND = 4,
} SfClause;

/**
 * Result of every fallible call.
 */
typedef enum {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_ARGUMENT = 2,
  SF_STATUS_DIMENSION_MISMATCH = 3,
  SF_STATUS_NOT_MARKOVIAN = 4,
  SF_STATUS_DOMAIN_VIOLATION = 5,
  SF_STATUS_NEGATIVE_TIME = 6,
  SF_STATUS_SPACE_MISMATCH = 7,
  SF_STATUS_NOT_ADMISSIBLE = 8,
  SF_STATUS_NOT_SANDWICHED = 9,
  SF_STATUS_TOO_LARGE = 10,
  SF_STATUS_INTERNAL = 11,
  SF_STATUS_PANIC = 12,
} SfStatus;

/**
 * Quadratic form on a space.
 */
typedef struct SfForm SfForm;

/**
 * Finite measure space.
 */
typedef struct SfSpace SfSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sf_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *sf_last_error_message(void);

/**
 * Space with `n` nodes named `"0"`, `"1"`, ... `boundary` may be null.
 *
 * # Safety
 * `masses` must point to `n` values, `boundary` (if not null) to `n`
 * bytes, and `out` must be writable.
 */
SfStatus sf_space_new(size_t n, const double *masses, const uint8_t *boundary, SfSpace **out);

/**
 * # Safety
 * `space` must come from this library and not be used afterwards.
 */
void sf_space_free(SfSpace *space);

/**
 * # Safety
 * `space` must be a valid handle or null.
 */
size_t sf_space_len(const SfSpace *space);

/**
 * Form with the given coefficient array and support (null for all nodes).
 *
 * # Safety
 * `coeff` must point to `n * n` values and `support` (if not null) to `n`
 * bytes.
 */
SfStatus sf_form_explicit(const SfSpace *space,
                          const uint8_t *support,
                          const double *coeff,
                          SfForm **out);

/**
 * Form `½ Σ b(x, y)(f(x) − f(y))² + Σ c(x) f(x)²` from symmetric edge
 * weights `b` and killing weights `c` (null for none).
 *
 * # Safety
 * `weights` must point to `n * n` values, `killing` (if not null) to `n`
 * values and `support` (if not null) to `n` bytes.
 */
SfStatus sf_form_from_graph(const SfSpace *space,
                            const double *weights,
                            const double *killing,
                            const uint8_t *support,
                            SfForm **out);

/**
 * Finite-difference Laplacian on `[0, 1]` with `n` interior nodes. The
 * Robin coefficients are ignored for the other boundary kinds.
 *
 * # Safety
 * `out` must be writable.
 */
SfStatus sf_interval_laplacian(size_t n,
                               SfBoundary kind,
                               double beta_left,
                               double beta_right,
                               SfForm **out);

/**
 * # Safety
 * `form` must come from this library and not be used afterwards.
 */
void sf_form_free(SfForm *form);

/**
 * Number of nodes of the space the form lives on.
 *
 * # Safety
 * `form` must be a valid handle or null.
 */
size_t sf_form_len(const SfForm *form);

/**
 * Copies the coefficient array (`n * n`) and the support mask (`n`).
 * Either output may be null.
 *
 * # Safety
 * Non-null outputs must have room for the stated number of entries.
 */
SfStatus sf_form_data(const SfForm *form, double *coeff, uint8_t *support);

/**
 * `Q(f, g)` for functions vanishing off the domain.
 *
 * # Safety
 * `f` and `g` must point to `n` values and `out` must be writable.
 */
SfStatus sf_form_evaluate(const SfForm *form, const double *f, const double *g, double *out);

/**
 * # Safety
 * `form` must be valid and `out` writable.
 */
SfStatus sf_active_main_part(const SfForm *form, SfForm **out);

/**
 * # Safety
 * `form` must be valid and `out` writable.
 */
SfStatus sf_killing_part(const SfForm *form, SfForm **out);

/**
 * Kernel of `e^{−tL}` as an `n * n` matrix, zero off the domain.
 *
 * # Safety
 * `out` must have room for `n * n` values.
 */
SfStatus sf_semigroup(const SfForm *form, double t, double *out);

/**
 * Verdicts of the kernel and the coefficient criteria for `q ⪯ q2`.
 *
 * # Safety
 * `times` must point to `n_times` values; the outputs must be writable.
 */
SfStatus sf_dominates(const SfForm *q,
                      const SfForm *q2,
                      const double *times,
                      size_t n_times,
                      double tol,
                      bool *semigroup_holds,
                      bool *form_holds);

/**
 * Capacity of the node set `set`; `INFINITY` when it leaves the domain.
 *
 * # Safety
 * `set` must point to `n` bytes and `out` must be writable.
 */
SfStatus sf_capacity(const SfForm *form, const uint8_t *set, double *out);

/**
 * Whether `qprime` is sandwiched between `q` and its active main part,
 * and the first failing clause otherwise.
 *
 * # Safety
 * The outputs must be writable; `failed` may be null.
 */
SfStatus sf_sandwich_check(const SfForm *q,
                           const SfForm *qprime,
                           bool *is_sandwiched,
                           SfClause *failed);

/**
 * The pair `(O, μ)` of a sandwiched form: `O` as a mask, `μ` as `n`
 * values. Fails with [`SfStatus::NotSandwiched`] otherwise.
 *
 * # Safety
 * `o` must have room for `n` bytes and `mu` for `n` values.
 */
SfStatus sf_recover_pair(const SfForm *q, const SfForm *qprime, uint8_t *o, double *mu);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SANDWICH_FORMS_H */

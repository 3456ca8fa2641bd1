#ifndef FINSLER_H
#define FINSLER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes. Values 2 to 5 match the exit codes of the `finsler` CLI.
 */
typedef enum FinslerStatus {
  FINSLER_STATUS_OK = 0,
  /*
   Parse error, unknown name or otherwise invalid argument.
   */
  FINSLER_STATUS_INVALID_ARGUMENT = 2,
  /*
   Point outside the metric's domain.
   */
  FINSLER_STATUS_DOMAIN = 3,
  /*
   Singular or ill-conditioned fundamental tensor.
   */
  FINSLER_STATUS_DEGENERATE = 4,
  /*
   Jet orders too low for the requested tensors.
   */
  FINSLER_STATUS_INSUFFICIENT_ORDERS = 5,
  FINSLER_STATUS_NULL_POINTER = 6,
  FINSLER_STATUS_BUFFER_TOO_SMALL = 7,
  /*
   Internal error; the handle arguments are left untouched.
   */
  FINSLER_STATUS_PANIC = 8,
} FinslerStatus;

/*
 All tensors of a metric at one point.
 */
typedef struct FinslerBundle FinslerBundle;

/*
 A parsed metric.
 */
typedef struct FinslerMetric FinslerMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or an empty string. The
 pointer stays valid until the next call into this library on the thread.
 */
const char *finsler_last_error(void);

/*
 Parses metric source text (the `.metric` file format).

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
enum FinslerStatus finsler_metric_parse(const char *source, struct FinslerMetric **out);

/*
 Looks up a built-in metric (`euclid<n>`, `riem-hyperbolic`, `ex1`, `ex2`, `ex3`).

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum FinslerStatus finsler_metric_builtin(const char *name, struct FinslerMetric **out);

/*
 Manifold dimension, or 0 for a null handle.

 # Safety
 `metric` must be null or a live handle.
 */
size_t finsler_metric_dim(const struct FinslerMetric *metric);

/*
 # Safety
 `metric` must be null or a handle not yet freed.
 */
void finsler_metric_free(struct FinslerMetric *metric);

/*
 Energy `E = F²` at `(x, y)`; both arrays hold `dim` values.

 # Safety
 `metric` must be a live handle, `x` and `y` readable for `dim` values, `out` writable.
 */
enum FinslerStatus finsler_eval_energy(const struct FinslerMetric *metric,
                                       const double *x,
                                       const double *y,
                                       double *out);

/*
 Computes every tensor at `(x, y)` with jet orders `(dx, dy)`; `(0, 0)`
 selects the default orders.

 # Safety
 `metric` must be a live handle, `x` and `y` readable for `dim` values, `out` writable.
 */
enum FinslerStatus finsler_bundle_compute(const struct FinslerMetric *metric,
                                          const double *x,
                                          const double *y,
                                          uint32_t dx,
                                          uint32_t dy,
                                          struct FinslerBundle **out);

/*
 # Safety
 `bundle` must be null or a handle not yet freed.
 */
void finsler_bundle_free(struct FinslerBundle *bundle);

/*
 Energy at the bundle's point.

 # Safety
 `bundle` must be a live handle and `out` writable.
 */
enum FinslerStatus finsler_bundle_energy(const struct FinslerBundle *bundle, double *out);

/*
 Rank and element count (`dim^rank`) of a tensor such as `"chern-h"`.

 # Safety
 `bundle` must be a live handle, `name` NUL-terminated, `rank` and `len` writable.
 */
enum FinslerStatus finsler_bundle_tensor_len(const struct FinslerBundle *bundle,
                                             const char *name,
                                             size_t *rank,
                                             size_t *len);

/*
 Copies a tensor into `buf`, row-major, so component `T[i][j][k]` of a
 rank-3 tensor sits at `(i*dim + j)*dim + k`.

 # Safety
 `bundle` must be a live handle, `name` NUL-terminated, `buf` writable for `cap` values.
 */
enum FinslerStatus finsler_bundle_tensor(const struct FinslerBundle *bundle,
                                         const char *name,
                                         double *buf,
                                         size_t cap);

/*
 Nullity (`kernel == 0`) or kernel (`kernel != 0`) space of a curvature
 tensor (`chern-h`, `chern-hv`, `barthel`, `cartan-h`). Writes the dimension
 to `mu` and an orthonormal basis to `basis`, one vector of `dim` values
 after another.

 # Safety
 `bundle` must be a live handle, `name` NUL-terminated, `basis` writable for
 `dim * dim` values and `mu` writable.
 */
enum FinslerStatus finsler_nullity(const struct FinslerBundle *bundle,
                                   const char *name,
                                   int32_t kernel,
                                   double rank_tol,
                                   double *basis,
                                   size_t *mu);

/*
 Vertical part of the bracket of the horizontal lifts of `a` and `b`.

 # Safety
 `bundle` must be a live handle; `a`, `b` readable and `out` writable for `dim` values.
 */
enum FinslerStatus finsler_bracket_vertical(const struct FinslerBundle *bundle,
                                            const double *a,
                                            const double *b,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINSLER_H */

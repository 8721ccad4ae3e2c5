#ifndef DTQW_ZAK_H
#define DTQW_ZAK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DtqwStatus {
  DTQW_STATUS_OK = 0,
  DTQW_STATUS_NULL_POINTER = 1,
  DTQW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Gap closure on the requested point or path.
   */
  DTQW_STATUS_SINGULAR = 3,
  DTQW_STATUS_NO_CONVERGENCE = 4,
  /**
   * `tan θ1` vanishes.
   */
  DTQW_STATUS_DEGENERATE_THETA1 = 5,
  /**
   * The operation needs split-step parameters.
   */
  DTQW_STATUS_WRONG_VARIANT = 6,
  DTQW_STATUS_AMBIGUOUS_BINNING = 7,
  DTQW_STATUS_VANISHING_OVERLAP = 8,
  DTQW_STATUS_INTERNAL = 9,
  DTQW_STATUS_PANIC = 10,
} DtqwStatus;

typedef enum DtqwProtocol {
  DTQW_PROTOCOL_HQW = 0,
  DTQW_PROTOCOL_NCRQW = 1,
  DTQW_PROTOCOL_SSQW = 2,
} DtqwProtocol;

/**
 * Opaque Zak landscape.
 */
typedef struct DtqwLandscape DtqwLandscape;

/**
 * Opaque walk state with its parameters.
 */
typedef struct DtqwWalk DtqwWalk;

/**
 * Protocol and angles in radians: `(θ)` for HQW, `(θ, φ)` for NCRQW and
 * `(θ1, θ2)` for SSQW. `angle2` is ignored for HQW.
 */
typedef struct DtqwParams {
  enum DtqwProtocol protocol;
  double angle1;
  double angle2;
} DtqwParams;

/**
 * Zak phases in radians. Band-resolved values are only meaningful when
 * the matching `has_*` flag is set.
 */
typedef struct DtqwZak {
  double z_plus;
  double z_minus;
  double z_total;
  double raw_total;
  bool has_plus;
  bool has_minus;
  size_t n_k;
} DtqwZak;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *dtqw_last_error(void);

/**
 * Quasi-energy `E(k)` in `[0, π]`.
 *
 * # Safety
 * `params` must be null or valid; `out_energy` must be null or writable.
 */
enum DtqwStatus dtqw_dispersion(const struct DtqwParams *params, double k, double *out_energy);

/**
 * Unit norm vector `n(k)` into `out[0..3]`.
 *
 * # Safety
 * `params` must be null or valid; `out` must be null or point to three
 * writable doubles.
 */
enum DtqwStatus dtqw_norm_vector(const struct DtqwParams *params, double k, double *out);

/**
 * Smallest `sin E` over the Brillouin zone; zero means gapless.
 *
 * # Safety
 * `params` must be null or valid; `out_gap` must be null or writable.
 */
enum DtqwStatus dtqw_min_gap(const struct DtqwParams *params, double *out_gap);

/**
 * Wilson-loop Zak phase on `[k_start, k_end]`, starting from `n_k` grid
 * intervals (at least 16) and refining by doubling.
 *
 * # Safety
 * `params` must be null or valid; `out` must be null or writable.
 */
enum DtqwStatus dtqw_zak_wilson(const struct DtqwParams *params,
                                double k_start,
                                double k_end,
                                size_t n_k,
                                bool flip_argument,
                                struct DtqwZak *out);

/**
 * Zak phases from quadrature of the closed-form connection integrand.
 *
 * # Safety
 * `params` must be null or valid; `out` must be null or writable.
 */
enum DtqwStatus dtqw_zak_quadrature(const struct DtqwParams *params,
                                    double k_start,
                                    double k_end,
                                    size_t n_k,
                                    struct DtqwZak *out);

/**
 * `tan θ2 / tan θ1 > cos k`, strict.
 *
 * # Safety
 * `out_allowed` must be null or writable.
 */
enum DtqwStatus dtqw_trs_allowed(double theta1, double theta2, double k, bool *out_allowed);

/**
 * Zak landscape over `param1 × param2` (pass `param2 = NULL` for HQW).
 *
 * # Safety
 * Axis pointers must reference `n1` / `n2` readable doubles; `out` must be
 * null or writable. Release the handle with [`dtqw_landscape_free`].
 */
enum DtqwStatus dtqw_landscape_new(enum DtqwProtocol protocol,
                                   const double *param1,
                                   size_t n1,
                                   const double *param2,
                                   size_t n2,
                                   bool flip_y,
                                   struct DtqwLandscape **out);

/**
 * Grid shape of a landscape.
 *
 * # Safety
 * `land` must be a live handle; out-pointers must be null or writable.
 */
enum DtqwStatus dtqw_landscape_shape(const struct DtqwLandscape *land, size_t *rows, size_t *cols);

/**
 * Cell `(i, j)`: `defined` is false on gapless cells, and `zx`, `zy` are
 * then left untouched.
 *
 * # Safety
 * `land` must be a live handle; out-pointers must be null or writable.
 */
enum DtqwStatus dtqw_landscape_get(const struct DtqwLandscape *land,
                                   size_t i,
                                   size_t j,
                                   double *zx,
                                   double *zy,
                                   bool *defined);

/**
 * # Safety
 * `land` must be null or a handle from [`dtqw_landscape_new`] that has not
 * been freed.
 */
void dtqw_landscape_free(struct DtqwLandscape *land);

/**
 * Walker at the origin with coin `H` (`H ⊗ H` in 2D). Pass
 * `params_y = NULL` for a 1D walk.
 *
 * # Safety
 * Parameter pointers must be null or valid; `out` must be null or
 * writable. Release the handle with [`dtqw_walk_free`].
 */
enum DtqwStatus dtqw_walk_new(const struct DtqwParams *params_x,
                              const struct DtqwParams *params_y,
                              struct DtqwWalk **out);

/**
 * Advances the walk by `n_steps`.
 *
 * # Safety
 * `walk` must be a live handle.
 */
enum DtqwStatus dtqw_walk_step(struct DtqwWalk *walk, size_t n_steps);

/**
 * Probability at site `(x, y)`; `y` is ignored for 1D walks.
 *
 * # Safety
 * `walk` must be a live handle; `out` must be null or writable.
 */
enum DtqwStatus dtqw_walk_probability(const struct DtqwWalk *walk,
                                      int64_t x,
                                      int64_t y,
                                      double *out);

/**
 * Steps taken and total probability.
 *
 * # Safety
 * `walk` must be a live handle; out-pointers must be null or writable.
 */
enum DtqwStatus dtqw_walk_info(const struct DtqwWalk *walk, size_t *steps, double *norm);

/**
 * # Safety
 * `walk` must be null or a handle from [`dtqw_walk_new`] that has not been
 * freed.
 */
void dtqw_walk_free(struct DtqwWalk *walk);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DTQW_ZAK_H */

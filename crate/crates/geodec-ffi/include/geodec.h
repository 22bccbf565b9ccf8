#ifndef GEODEC_H
#define GEODEC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

/**
 * Result of a call. The first four values match the CLI exit codes.
 */
typedef enum GeodecStatus {
  GEODEC_STATUS_OK = 0,
  GEODEC_STATUS_INVALID_INPUT = 1,
  GEODEC_STATUS_UNSOLVABLE = 2,
  GEODEC_STATUS_VERIFICATION_FAILED = 3,
  GEODEC_STATUS_NULL_POINTER = 4,
  GEODEC_STATUS_BUFFER_TOO_SMALL = 5,
  GEODEC_STATUS_INTERNAL = 6,
} GeodecStatus;

typedef enum GeodecTriple {
  GEODEC_TRIPLE_SUPREMAL = 0,
  GEODEC_TRIPLE_VM = 1,
  GEODEC_TRIPLE_SM = 2,
} GeodecTriple;

typedef enum GeodecControllerMatrix {
  GEODEC_CONTROLLER_MATRIX_AC = 0,
  GEODEC_CONTROLLER_MATRIX_BC = 1,
  GEODEC_CONTROLLER_MATRIX_CC = 2,
  GEODEC_CONTROLLER_MATRIX_DC = 3,
} GeodecControllerMatrix;

/**
 * Opaque controller handle.
 */
typedef struct GeodecController GeodecController;

/**
 * Opaque plant handle.
 */
typedef struct GeodecPlant GeodecPlant;

typedef struct GeodecTolerances {
  double rank_rel;
  double eig_match;
  double residual;
} GeodecTolerances;

typedef struct GeodecDims {
  size_t n;
  size_t m;
  size_t q;
  size_t p;
  size_t r;
} GeodecDims;

typedef struct GeodecAnalysis {
  bool solvable;
  size_t dim_v_star;
  size_t dim_s_star;
  size_t dim_r_star;
  size_t dim_q_star;
  /**
   * Zero when the plant is not solvable.
   */
  size_t dim_v_m;
  /**
   * Zero when the plant is not solvable.
   */
  size_t dim_s_m;
} GeodecAnalysis;

typedef struct GeodecVerification {
  bool decoupled;
  double max_markov_residual;
  double feedthrough_residual;
} GeodecVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static NUL-terminated string.
 */
const char *geodec_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *geodec_last_error(void);

struct GeodecTolerances geodec_tolerances_default(void);

/**
 * Build a plant from nine row-major matrices with the shapes implied by
 * `dims`: `a` n×n, `b` n×m, `h` n×q, `c` p×n, `d_y` p×m, `g_y` p×q, `e` r×n,
 * `d_z` r×m, `g_z` r×q.
 *
 * # Safety
 * Each non-empty matrix pointer must reference `rows * cols` readable
 * doubles; `out` must be writable.
 */
enum GeodecStatus geodec_plant_new(struct GeodecDims dims,
                                   const double *a,
                                   const double *b,
                                   const double *h,
                                   const double *c,
                                   const double *d_y,
                                   const double *g_y,
                                   const double *e,
                                   const double *d_z,
                                   const double *g_z,
                                   struct GeodecPlant **out);

/**
 * Parse a plant file. Tolerances and targets in the file are ignored;
 * tolerances are passed per call.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GeodecStatus geodec_plant_from_json(const char *json, struct GeodecPlant **out);

/**
 * Canonical plant-file text; free it with [`geodec_string_free`].
 *
 * # Safety
 * `plant` must come from this library; `out` must be writable.
 */
enum GeodecStatus geodec_plant_to_json(const struct GeodecPlant *plant, char **out);

/**
 * # Safety
 * `plant` must come from this library; `out` must be writable.
 */
enum GeodecStatus geodec_plant_dims(const struct GeodecPlant *plant, struct GeodecDims *out);

/**
 * # Safety
 * `plant` must come from this library and not be used afterwards. NULL is
 * ignored.
 */
void geodec_plant_free(struct GeodecPlant *plant);

/**
 * Canonical subspace dimensions and the solvability verdict. Returns
 * `Unsolvable` (with `out` filled) when the problem has no solution.
 *
 * # Safety
 * `plant` must come from this library; `tol` may be NULL for defaults;
 * `out` must be writable.
 */
enum GeodecStatus geodec_analyze(const struct GeodecPlant *plant,
                                 const struct GeodecTolerances *tol,
                                 struct GeodecAnalysis *out);

/**
 * Fixed poles of a canonical triple into `re[..len]`, `im[..len]`, sorted.
 * When `cap` is too small, `len` receives the required size and the call
 * returns `BufferTooSmall`.
 *
 * # Safety
 * `re` and `im` must hold `cap` writable doubles (NULL allowed when `cap`
 * is 0); `len` must be writable.
 */
enum GeodecStatus geodec_fixed_poles(const struct GeodecPlant *plant,
                                     const struct GeodecTolerances *tol,
                                     enum GeodecTriple which,
                                     double *re,
                                     double *im,
                                     size_t cap,
                                     size_t *len);

/**
 * Synthesize a compensator for a canonical triple. `n_poles == 0` uses the
 * default targets; otherwise the list must be closed under conjugation and
 * its length must equal the number of assignable poles.
 *
 * # Safety
 * `poles_re` and `poles_im` must hold `n_poles` readable doubles; `out`
 * must be writable.
 */
enum GeodecStatus geodec_synthesize(const struct GeodecPlant *plant,
                                    const struct GeodecTolerances *tol,
                                    enum GeodecTriple which,
                                    const double *poles_re,
                                    const double *poles_im,
                                    size_t n_poles,
                                    struct GeodecController **out);

/**
 * Parse a controller file for the given plant.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GeodecStatus geodec_controller_from_json(const struct GeodecPlant *plant,
                                              const char *json,
                                              struct GeodecController **out);

/**
 * Canonical controller-file text; free it with [`geodec_string_free`].
 *
 * # Safety
 * `ctrl` must come from this library; `out` must be writable.
 */
enum GeodecStatus geodec_controller_to_json(const struct GeodecController *ctrl, char **out);

/**
 * Controller state dimension, or 0 for NULL.
 *
 * # Safety
 * `ctrl` must come from this library or be NULL.
 */
size_t geodec_controller_order(const struct GeodecController *ctrl);

/**
 * Copy one controller matrix row-major into `out`. `rows` and `cols` always
 * receive the shape; `BufferTooSmall` is returned when `cap < rows * cols`.
 *
 * # Safety
 * `out` must hold `cap` writable doubles (NULL allowed when `cap` is 0);
 * `rows` and `cols` must be writable.
 */
enum GeodecStatus geodec_controller_matrix(const struct GeodecController *ctrl,
                                           enum GeodecControllerMatrix which,
                                           double *out,
                                           size_t cap,
                                           size_t *rows,
                                           size_t *cols);

/**
 * # Safety
 * `ctrl` must come from this library and not be used afterwards. NULL is
 * ignored.
 */
void geodec_controller_free(struct GeodecController *ctrl);

/**
 * Close the loop and check that the disturbance no longer reaches `z`.
 * Returns `VerificationFailed` (with `out` filled) when it does.
 *
 * # Safety
 * Handles must come from this library; `tol` may be NULL; `out` must be
 * writable.
 */
enum GeodecStatus geodec_verify(const struct GeodecPlant *plant,
                                const struct GeodecController *ctrl,
                                const struct GeodecTolerances *tol,
                                struct GeodecVerification *out);

/**
 * # Safety
 * `s` must be a string returned by this library, or NULL.
 */
void geodec_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEODEC_H */

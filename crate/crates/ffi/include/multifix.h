#ifndef MULTIFIX_H
#define MULTIFIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MfStatus {
  MF_STATUS_OK = 0,
  MF_STATUS_NULL_POINTER = 1,
  MF_STATUS_INVALID_UTF8 = 2,
  MF_STATUS_PARSE = 3,
  MF_STATUS_INVALID_ARGUMENT = 4,
  MF_STATUS_DIMENSION_MISMATCH = 5,
  MF_STATUS_OUT_OF_DOMAIN = 6,
  MF_STATUS_BOUND_INAPPLICABLE = 7,
  MF_STATUS_EMPTY_FIXED_POINT_SET = 8,
  MF_STATUS_NOT_CONVERGED = 9,
  MF_STATUS_PANIC = 99,
} MfStatus;

/*
 Opaque mapping handle.
 */
typedef struct MfMap MfMap;

/*
 Opaque finite point set handle.
 */
typedef struct MfSet MfSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *mf_last_error_message(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must come from this library and not have been freed.
 */
void mf_string_free(char *s);

/*
 Parses a point set such as `[[0,0],[1,2]]`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MfStatus mf_set_from_json(const char *json, struct MfSet **out);

/*
 Builds a point set from `count` rows of `dim` coordinates stored
 row-major in `data`.

 # Safety
 `data` must point to `count * dim` doubles; `out` must be writable.
 */
enum MfStatus mf_set_from_rows(const double *data, size_t count, size_t dim, struct MfSet **out);

/*
 # Safety
 `set` must come from this library and not have been freed.
 */
void mf_set_free(struct MfSet *set);

/*
 Number of distinct points; 0 for NULL.

 # Safety
 `set` must be NULL or a live handle.
 */
size_t mf_set_len(const struct MfSet *set);

/*
 # Safety
 `set` must be NULL or a live handle.
 */
size_t mf_set_dim(const struct MfSet *set);

/*
 Parses a mapping document (`affine`, `singleton` or `tabulated`).

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MfStatus mf_map_from_json(const char *json, struct MfMap **out);

/*
 # Safety
 `map` must come from this library and not have been freed.
 */
void mf_map_free(struct MfMap *map);

/*
 # Safety
 `map` must be NULL or a live handle.
 */
size_t mf_map_dim(const struct MfMap *map);

/*
 Hausdorff distance `H(A, B)`.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MfStatus mf_hausdorff(const struct MfSet *a, const struct MfSet *b, double *out);

/*
 `δ(A, B) = max ‖a − b‖` over all pairs.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MfStatus mf_delta(const struct MfSet *a, const struct MfSet *b, double *out);

/*
 `d(x, Tx)`.

 # Safety
 `x` must point to `dim` doubles; `out` must be writable.
 */
enum MfStatus mf_residual(const struct MfMap *map, const double *x, size_t dim, double *out);

/*
 Evaluates `Tx` into a new set handle.

 # Safety
 `x` must point to `dim` doubles; `out` must be writable.
 */
enum MfStatus mf_map_evaluate(const struct MfMap *map,
                              const double *x,
                              size_t dim,
                              struct MfSet **out);

/*
 The averaged map `T_λ` as a new handle; `λ ∈ (0, 1]`.

 # Safety
 `map` must be live; `out` must be writable.
 */
enum MfStatus mf_map_averaged(const struct MfMap *map, double lambda, struct MfMap **out);

/*
 Certification report as pretty JSON.

 # Safety
 `map` must be live; `out` must be writable. Free the result with
 `mf_string_free`.
 */
enum MfStatus mf_certify_json(const struct MfMap *map, size_t pairs_cap, uint64_t seed, char **out);

/*
 Krasnoselskii iteration from `x0`. Writes the last iterate to `out_x`
 (`dim` doubles) and the step count to `out_steps`. Returns
 `NotConverged` when the residual did not reach `eps`; the outputs are
 still written.

 # Safety
 `x0` and `out_x` must point to `dim` doubles; `out_steps` must be
 writable.
 */
enum MfStatus mf_krasnoselskii_solve(const struct MfMap *map,
                                     double lambda,
                                     const double *x0,
                                     size_t dim,
                                     double eps,
                                     size_t max_iter,
                                     double *out_x,
                                     size_t *out_steps);

/*
 Data-dependence report as pretty JSON. `constants_json` is a class
 constants object such as `{"class":"enriched-kannan","b":1,"theta":0.3}`.

 # Safety
 Handles must be live; `constants_json` NUL-terminated; `out` writable.
 */
enum MfStatus mf_datadep_json(const struct MfMap *t,
                              const struct MfMap *s,
                              const char *constants_json,
                              char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTIFIX_H */

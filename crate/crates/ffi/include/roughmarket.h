#ifndef ROUGHMARKET_H
#define ROUGHMARKET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum RmStatus {
  RM_STATUS_OK = 0,
  RM_STATUS_NULL_POINTER = 1,
  RM_STATUS_INVALID_ARGUMENT = 2,
  RM_STATUS_INVALID_PATH = 3,
  RM_STATUS_IO = 4,
  RM_STATUS_VARIATION = 5,
  RM_STATUS_STRATEGY = 6,
  // The capital bound was computed but does not hold.
  RM_STATUS_BOUND_VIOLATED = 7,
  RM_STATUS_PANIC = 99,
} RmStatus;

// Opaque price path.
typedef struct RmPath RmPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a path from `n` samples. `times` may be null for a uniform grid
// on `[0, horizon]`.
//
// # Safety
// `values` (and `times` if non-null) must point to `n` doubles; `out` must be writable.
enum RmStatus rm_path_new(const double *times,
                          const double *values,
                          size_t n,
                          double horizon,
                          struct RmPath **out);

// Generates a path from a JSON generator spec such as
// `{"kind": "exp-fractional", "hurst": 0.4, "n_samples": 1025, "seed": 7}`.
//
// # Safety
// `spec_json` must be a NUL-terminated string; `out` must be writable.
enum RmStatus rm_path_generate_json(const char *spec_json, struct RmPath **out);

// Reads a `t,x` CSV path file.
//
// # Safety
// `file` must be a NUL-terminated string; `out` must be writable.
enum RmStatus rm_path_read_csv(const char *file, struct RmPath **out);

// # Safety
// `path` must be null or a handle from this library not yet freed.
void rm_path_free(struct RmPath *path);

// Number of samples; 0 for a null handle.
//
// # Safety
// `path` must be null or a live handle.
size_t rm_path_len(const struct RmPath *path);

// Sample values, valid while the handle lives; null for a null handle.
//
// # Safety
// `path` must be null or a live handle.
const double *rm_path_values(const struct RmPath *path);

// `var_p` of the path.
//
// # Safety
// `path` must be a live handle; `out` must be writable.
enum RmStatus rm_var_power(const struct RmPath *path, double p, double *out);

// Variation with Taylor's gauge `u² / (2 ln* ln* u)`.
//
// # Safety
// `path` must be a live handle; `out` must be writable.
enum RmStatus rm_var_psi(const struct RmPath *path, double *out);

// Total, positive and negative variation of the path.
//
// # Safety
// `path` must be a live handle; the outputs must be writable.
enum RmStatus rm_var_signed(const struct RmPath *path, double *var, double *plus, double *minus);

// Upcrossings and downcrossings of `(a, b)`.
//
// # Safety
// `path` must be a live handle; the outputs must be writable.
enum RmStatus rm_crossings(const struct RmPath *path,
                           double a,
                           double b,
                           uint64_t *up,
                           uint64_t *down);

// Upper probability of the singleton `{ω}` for a positive path.
//
// # Safety
// `path` must be a live handle; `out` must be writable.
enum RmStatus rm_upper_prob(const struct RmPath *path, double *out);

// Terminal capital of Doob's strategy on `(a, b)`.
//
// # Safety
// `path` must be a live handle; `out` must be writable.
enum RmStatus rm_doob_terminal(const struct RmPath *path, double a, double b, double *out);

// Runs the level mixture on the path sampled at `n` intervals and checks
// its terminal capital against the variation bound. `terminal` and `rhs`
// are written whenever they were computed, including on
// `RM_STATUS_BOUND_VIOLATED`.
//
// # Safety
// `path` must be a live handle; the outputs must be writable.
enum RmStatus rm_prop3_verify(const struct RmPath *path,
                              double epsilon,
                              double delta,
                              size_t n,
                              double *terminal,
                              double *rhs);

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *rm_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROUGHMARKET_H */

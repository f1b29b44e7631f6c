#ifndef HALFSPACE_THERMAL_H
#define HALFSPACE_THERMAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum HtStatus {
  HT_STATUS_OK = 0,
  HT_STATUS_NULL_POINTER = 1,
  HT_STATUS_INVALID_INPUT = 2,
  HT_STATUS_CONFIG = 3,
  HT_STATUS_NUMERICAL = 4,
  HT_STATUS_VALIDATION_FAILED = 5,
  HT_STATUS_PANIC = 6,
} HtStatus;

// A configured problem together with its numerical settings.
typedef struct HtProblem HtProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse a JSON problem configuration. Returns NULL on failure.
//
// # Safety
// `json` must be NULL or a valid NUL-terminated string.
struct HtProblem *ht_problem_from_json(const char *json);

// Step temperature `t0` on `y > 0` and step flux `t0_prime` on `y < 0`.
struct HtProblem *ht_problem_new_step(double t0, double t0_prime);

// Ramp up on `[a, b]` and down on `[b, 2b - a]` superposed on a step
// temperature; step flux.
struct HtProblem *ht_problem_new_ramp(double t0, double t0_prime, double a, double b);

// # Safety
// `problem` must be NULL or a handle from one of the constructors, not yet
// freed.
void ht_problem_free(struct HtProblem *problem);

// Relative tolerance of the β-quadrature, in `[1e-14, 1e-2]`.
//
// # Safety
// `problem` must be NULL or a live handle.
enum HtStatus ht_problem_set_rel_tol(struct HtProblem *problem, double rel_tol);

// Temperature at `(x, y)` and time `t` in scaled units.
//
// # Safety
// `problem` must be a live handle and `value` writable. `error_estimate`
// may be NULL.
enum HtStatus ht_temperature(const struct HtProblem *problem,
                             double x,
                             double y,
                             double t,
                             double *value,
                             double *error_estimate);

// Temperature at polar position `(r, theta)`, `theta ∈ [-π/2, π/2]`.
//
// # Safety
// As [`ht_temperature`].
enum HtStatus ht_temperature_polar(const struct HtProblem *problem,
                                   double r,
                                   double theta,
                                   double t,
                                   double *value,
                                   double *error_estimate);

// Temperatures at `n` points `(xs[i], ys[i])`, all at time `t`. Stops at
// the first failure; entries before it are filled in.
//
// # Safety
// `xs`, `ys` and `values` must each hold `n` elements; `error_estimates`
// is NULL or holds `n` elements.
enum HtStatus ht_temperature_many(const struct HtProblem *problem,
                                  const double *xs,
                                  const double *ys,
                                  size_t n,
                                  double t,
                                  double *values,
                                  double *error_estimates);

// `(1/(π√2)) ∫_1^∞ G(β, θ) dβ`, which equals `1 - H(θ)`.
//
// # Safety
// `value` must be writable; `error_estimate` may be NULL.
enum HtStatus ht_identity_integral(double theta,
                                   double rel_tol,
                                   double *value,
                                   double *error_estimate);

// The contour kernel `G(β, θ)` for `β > 1`.
//
// # Safety
// `value` must be writable.
enum HtStatus ht_kernel_g(double beta, double theta, double *value);

// Run the finite-difference solver to `t` on a grid of spacing `h` and
// step `dt` (graded mesh), and compare it with the semi-analytical field
// on the slices `x = 0.05, 0.2`, 41 points of `y ∈ [-1, 1]`.
// Returns `HT_STATUS_VALIDATION_FAILED` when the largest difference
// exceeds `tolerance`; `max_diff` is written in both cases.
//
// # Safety
// `problem` must be a live handle; `max_diff` may be NULL.
enum HtStatus ht_validate(const struct HtProblem *problem,
                          double t,
                          double h,
                          double dt,
                          double tolerance,
                          double *max_diff);

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
//
// # Safety
// `buf` must be NULL or hold `len` bytes.
size_t ht_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ht_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALFSPACE_THERMAL_H */

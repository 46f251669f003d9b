#ifndef WEYLLAB_H
#define WEYLLAB_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define WEYL_ROUTE_OP_RECURSION 0

#define WEYL_ROUTE_CONTINUED_FRACTION 1

#define WEYL_INTERP_LINEAR 0

#define WEYL_INTERP_CUBIC 1

#define WEYL_TAIL_COMPACT 0

#define WEYL_TAIL_PERIODIC 1

#define WEYL_TAIL_CONSTANT 2

typedef enum {
  WEYL_STATUS_OK = 0,
  WEYL_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument values, sizes or enumeration codes.
   */
  WEYL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The input lies outside the method's domain.
   */
  WEYL_STATUS_DOMAIN = 3,
  /**
   * The computation itself failed (integration, conditioning, ...).
   */
  WEYL_STATUS_NUMERICAL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  WEYL_STATUS_PANIC = 5,
} WeylStatus;

/**
 * Finite Jacobi operator.
 */
typedef struct WeylJacobi WeylJacobi;

/**
 * Positive discrete measure `Σ w_k δ_{λ_k}`.
 */
typedef struct WeylMeasure WeylMeasure;

/**
 * Sampled Schrödinger potential.
 */
typedef struct WeylPotential WeylPotential;

typedef struct {
  double re;
  double im;
} WeylComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *weyl_version(void);

/**
 * Message of the last failure on this thread, or NULL if there was none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *weyl_last_error(void);

/**
 * # Safety
 * `positions` and `weights` must point to `len` readable doubles; `out`
 * must be writable.
 */
WeylStatus weyl_measure_new(const double *positions,
                            const double *weights,
                            size_t len,
                            WeylMeasure **out);

/**
 * # Safety
 * `measure` must be NULL or a handle from this library, freed at most once.
 */
void weyl_measure_free(WeylMeasure *measure);

/**
 * Number of atoms after merging coincident positions; 0 for NULL.
 *
 * # Safety
 * `measure` must be NULL or a live handle.
 */
size_t weyl_measure_len(const WeylMeasure *measure);

/**
 * Copy the atoms, sorted by position, into arrays of `capacity` doubles.
 *
 * # Safety
 * `measure` must be a live handle; both arrays must hold `capacity` doubles.
 */
WeylStatus weyl_measure_atoms(const WeylMeasure *measure,
                              double *positions,
                              double *weights,
                              size_t capacity);

/**
 * `∫ dμ(λ) / (λ - z)`.
 *
 * # Safety
 * `measure` must be a live handle and `out` writable.
 */
WeylStatus weyl_measure_stieltjes(const WeylMeasure *measure, WeylComplex z, WeylComplex *out);

/**
 * Recover a Jacobi operator of size `depth` from a measure (normalised to
 * unit mass first). `route` is one of the `WEYL_ROUTE_*` codes.
 *
 * # Safety
 * `measure` must be a live handle and `out` writable.
 */
WeylStatus weyl_measure_strip(const WeylMeasure *measure,
                              uint32_t route_code,
                              size_t depth,
                              WeylJacobi **out);

/**
 * Operator with diagonal `b[0..n]` and off-diagonal `a[0..n-1]` (`a` may be
 * NULL when `n == 1`).
 *
 * # Safety
 * `b` must hold `n` doubles, `a` `n - 1`; `out` must be writable.
 */
WeylStatus weyl_jacobi_new(const double *b, const double *a, size_t n, WeylJacobi **out);

/**
 * # Safety
 * `op` must be NULL or a handle from this library, freed at most once.
 */
void weyl_jacobi_free(WeylJacobi *op);

/**
 * Size of the operator; 0 for NULL.
 *
 * # Safety
 * `op` must be NULL or a live handle.
 */
size_t weyl_jacobi_len(const WeylJacobi *op);

/**
 * Copy `b` (`n` entries) and `a` (`n - 1` entries) out.
 *
 * # Safety
 * `op` must be a live handle; `b` must hold `n` doubles and `a` `n - 1`.
 */
WeylStatus weyl_jacobi_coefficients(const WeylJacobi *op, double *b, double *a);

/**
 * Spectral measure of `δ₁`.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
WeylStatus weyl_jacobi_spectral_measure(const WeylJacobi *op, WeylMeasure **out);

/**
 * `m(z) = ⟨δ₁, (J_s - z)⁻¹ δ₁⟩` for the operator with its first `strip`
 * rows and columns removed.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
WeylStatus weyl_jacobi_m_function(const WeylJacobi *op,
                                  WeylComplex z,
                                  size_t strip,
                                  WeylComplex *out);

/**
 * Potential sampled at `n` equispaced points of `[x0, x1]`. `interpolation`
 * is a `WEYL_INTERP_*` code, `tail` a `WEYL_TAIL_*` code; `tail_value` is
 * used by `WEYL_TAIL_CONSTANT` only. A periodic tail takes `x1 - x0` as the
 * period.
 *
 * # Safety
 * `samples` must hold `n` doubles and `out` must be writable.
 */
WeylStatus weyl_potential_new(double x0,
                              double x1,
                              const double *samples,
                              size_t n,
                              uint32_t interpolation,
                              uint32_t tail,
                              double tail_value,
                              WeylPotential **out);

/**
 * # Safety
 * `pot` must be NULL or a handle from this library, freed at most once.
 */
void weyl_potential_free(WeylPotential *pot);

/**
 * Weyl m-function `u₊'(x)/u₊(x)` at `z` (Riccati integration, default
 * tolerances). When `u₊(x) = 0` the value is a pole: `*is_pole` is set and
 * `*out` holds NaNs.
 *
 * # Safety
 * `pot` must be a live handle; `out` and `is_pole` must be writable.
 */
WeylStatus weyl_potential_m(const WeylPotential *pot,
                            WeylComplex z,
                            double x,
                            WeylComplex *out,
                            bool *is_pole);

/**
 * Lowest `count` eigenvalues on `[lo, hi]` with boundary conditions
 * `u cos θ + u' sin θ = 0` at each end (`θ = 0` Dirichlet, `π/2` Neumann).
 *
 * # Safety
 * `pot` must be a live handle and `out` must hold `count` doubles.
 */
WeylStatus weyl_potential_eigenvalues(const WeylPotential *pot,
                                      double lo,
                                      double hi,
                                      double theta_left,
                                      double theta_right,
                                      size_t count,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEYLLAB_H */

#ifndef FORCHHEIMER_H
#define FORCHHEIMER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FhStatus {
  FH_STATUS_OK = 0,
  FH_STATUS_NULL_POINTER = 1,
  /**
   * Argument outside the domain of the operation (including invalid laws).
   */
  FH_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Invalid configuration, such as an unknown case name or a bad time step.
   */
  FH_STATUS_CONFIG = 3,
  /**
   * Nonlinear iteration hit its cap.
   */
  FH_STATUS_NON_CONVERGENCE = 4,
  /**
   * Linear solver or quadrature breakdown.
   */
  FH_STATUS_SOLVER = 5,
  FH_STATUS_PANIC = 6,
} FhStatus;

/**
 * Opaque handle to a generalized polynomial law.
 */
typedef struct FhLaw FhLaw;

/**
 * Opaque handle to a finished simulation run with its final-time errors.
 */
typedef struct FhRun FhRun;

/**
 * Exponents derived from the law: `a = α_N/(α_N+1)`, `β = 2-a`, `λ = β/(β-1)`, `γ = a/β`.
 */
typedef struct FhExponents {
  double a;
  double beta;
  double lambda;
  double gamma;
} FhExponents;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid until
 * the next failing call on the same thread.
 */
const char *fh_last_error_message(void);

/**
 * Creates the law `g(s) = Σ coefficients[i] s^exponents[i]` with `len` terms.
 */
enum FhStatus fh_law_new(const double *exponents,
                         const double *coefficients,
                         size_t len,
                         struct FhLaw **out);

/**
 * Creates the two-term law `g(s) = 1 + s`.
 */
enum FhStatus fh_law_two_term(struct FhLaw **out);

/**
 * Releases a law; null is ignored.
 */
void fh_law_free(struct FhLaw *law);

/**
 * `K(ξ)` for `ξ ≥ 0`.
 */
enum FhStatus fh_law_eval_k(const struct FhLaw *law, double xi, double *out);

/**
 * `K′(ξ)` for `ξ ≥ 0`.
 */
enum FhStatus fh_law_eval_k_prime(const struct FhLaw *law, double xi, double *out);

/**
 * `H(ξ) = ∫₀^{ξ²} K(√s) ds`.
 */
enum FhStatus fh_law_eval_h(const struct FhLaw *law, double xi, double *out);

enum FhStatus fh_law_derived_exponents(const struct FhLaw *law, struct FhExponents *out);

/**
 * Runs the named manufactured case (`"example1"`, `"example2"`, `"constant"`,
 * `"steady_linear"`) with `law` on the `n×n` mesh with elements of `order`,
 * Picard iteration and step `dt` up to `t_final`. A null `law` selects the
 * law the case was built for.
 */
enum FhStatus fh_run_case(const char *case_name,
                          const struct FhLaw *law,
                          size_t n,
                          size_t order,
                          double dt,
                          double t_final,
                          struct FhRun **out);

/**
 * Releases a run; null is ignored.
 */
void fh_run_free(struct FhRun *run);

/**
 * `‖ρ(T) - ρh(T)‖_{L²}`.
 */
enum FhStatus fh_run_l2_error(const struct FhRun *run, double *out);

/**
 * `‖∇(ρ(T) - ρh(T))‖_{L^β}`.
 */
enum FhStatus fh_run_grad_error(const struct FhRun *run, double *out);

/**
 * Number of time steps taken.
 */
enum FhStatus fh_run_step_count(const struct FhRun *run, size_t *out);

/**
 * Copies up to `capacity` final-time coefficients into `buffer` and stores the
 * total count in `len`. Pass a null buffer to query the count only.
 */
enum FhStatus fh_run_final_coefficients(const struct FhRun *run,
                                        double *buffer,
                                        size_t capacity,
                                        size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORCHHEIMER_H */

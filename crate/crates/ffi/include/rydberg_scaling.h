#ifndef RYDBERG_SCALING_H
#define RYDBERG_SCALING_H

/* Generated by cbindgen from the Rust sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  /**
   * Parameters outside their domain, mismatched sizes, bad configuration.
   */
  RS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Too few or non-positive data points for a fit.
   */
  RS_STATUS_INSUFFICIENT_DATA = 3,
  /**
   * A solver or propagator did not reach its tolerance.
   */
  RS_STATUS_NON_CONVERGENCE = 4,
  RS_STATUS_IO = 5,
  /**
   * The caller's buffer is shorter than the result.
   */
  RS_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * The handle has no result yet.
   */
  RS_STATUS_NOT_RUN = 7,
  RS_STATUS_PANIC = 8,
} RsStatus;

/**
 * Opaque simulation handle.
 */
typedef struct RsSimulation RsSimulation;

/**
 * Exponents as exact fractions `num / den`.
 */
typedef struct RsExponents {
  int64_t beta_num;
  int64_t beta_den;
  int64_t one_over_delta_num;
  int64_t one_over_delta_den;
  int64_t gamma_num;
  int64_t gamma_den;
  int64_t z_num;
  int64_t z_den;
  int64_t nu_num;
  int64_t nu_den;
} RsExponents;

/**
 * SI inputs: rad/s, rad/s, m^-d, J m^p.
 */
typedef struct RsPhysicalParams {
  double rabi_frequency;
  double laser_detuning;
  double density;
  double interaction_coefficient;
  uint32_t dimension;
  uint32_t interaction_exponent;
  uint64_t atom_number;
} RsPhysicalParams;

/**
 * Dimensionless drive and detuning, with the natural units in SI.
 */
typedef struct RsNaturalParams {
  double alpha;
  double delta;
  /**
   * E_c, J.
   */
  double energy;
  /**
   * a, m.
   */
  double length;
  /**
   * ħ / E_c, s.
   */
  double time;
} RsNaturalParams;

typedef struct RsEosSolution {
  double f_r;
  double unclamped;
  double residual;
  /**
   * 1 when the root exceeded 1 and was capped.
   */
  uint8_t saturated;
  /**
   * 0 physical, 1 lower small, 2 lower large.
   */
  uint8_t branch;
} RsEosSolution;

typedef struct RsLdaResult {
  double f_r;
  /**
   * `f_r / α_peak^{1/δ}`.
   */
  double prefactor;
  /**
   * NaN when no closed form applies.
   */
  double closed_form;
  double quadrature_error;
  /**
   * Number of warnings raised, e.g. blockade radius exceeding the cloud.
   */
  uint32_t warning_count;
} RsLdaResult;

typedef struct RsSaturationFit {
  double rate;
  double saturation;
  double rate_stderr;
  double saturation_stderr;
  double residual_norm;
  uint32_t iterations;
  uint8_t converged;
  uint8_t saturation_unconstrained;
} RsSaturationFit;

typedef struct RsPowerLawFit {
  double exponent;
  /**
   * Natural-log intercept.
   */
  double intercept;
  double exponent_stderr;
  double intercept_stderr;
  double r_squared;
} RsPowerLawFit;

/**
 * Disorder-averaged run on a unit-density periodic box, starting from the
 * all-ground state.
 */
typedef struct RsSimulationSpec {
  uint32_t dimension;
  uint32_t interaction_exponent;
  double alpha;
  double delta;
  size_t atom_count;
  size_t realizations;
  /**
   * `-1` full basis, `0` adaptive cutoff, `k > 0` at most `k` excitations.
   */
  int32_t max_excitations;
  /**
   * Propagator accuracy target in (0, 1e-3].
   */
  double tol;
  uint64_t master_seed;
  /**
   * Output grid `t_max · i / (points − 1)` in units of ħ / E_c.
   */
  double t_max;
  size_t points;
  /**
   * Minimum pair distance in units of `a`.
   */
  double r_min;
} RsSimulationSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes, without the
 * terminator, or 0 when there is none.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t rs_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * # Safety
 * `out` must point to writable memory for one `RsExponents`.
 */
enum RsStatus rs_critical_exponents(uint32_t d, uint32_t p, struct RsExponents *out);

/**
 * # Safety
 * `phys` must point to a readable `RsPhysicalParams`, `out` to a writable
 * `RsNaturalParams`.
 */
enum RsStatus rs_nondimensionalize(const struct RsPhysicalParams *phys,
                                   struct RsNaturalParams *out);

/**
 * Physical root of the mean-field equation of state.
 *
 * # Safety
 * `out` must point to a writable `RsEosSolution`.
 */
enum RsStatus rs_eos_solve(double alpha,
                           double delta,
                           uint32_t d,
                           uint32_t p,
                           struct RsEosSolution *out);

/**
 * Scaling function `χ(y)`.
 *
 * # Safety
 * `out` must point to a writable `f64`.
 */
enum RsStatus rs_chi(double y, uint32_t d, uint32_t p, double *out);

/**
 * Superatom blockade radius in units of `a`.
 *
 * # Safety
 * `out` must point to a writable `f64`.
 */
enum RsStatus rs_blockade_radius(double alpha, uint32_t d, uint32_t p, double *out);

/**
 * Cloud average of the power law `f = α^{1/δ}` over a Gaussian cloud with
 * `axes` standard deviations in metres.
 *
 * # Safety
 * `sigmas` must be valid for `axes` reads, `out` writable.
 */
enum RsStatus rs_lda_average(const double *sigmas,
                             size_t axes,
                             double atom_number,
                             double alpha_peak,
                             uint32_t d,
                             uint32_t p,
                             struct RsLdaResult *out);

/**
 * Least-squares fit of `N(t) = N_sat (1 − exp(−R t / N_sat))`.
 *
 * # Safety
 * `times` and `counts` must be valid for `len` reads, `out` writable.
 */
enum RsStatus rs_fit_saturation(const double *times,
                                const double *counts,
                                size_t len,
                                struct RsSaturationFit *out);

/**
 * Unweighted log-log fit of `y = exp(intercept) x^exponent`.
 *
 * # Safety
 * `x` and `y` must be valid for `len` reads, `out` writable.
 */
enum RsStatus rs_fit_powerlaw(const double *x,
                              const double *y,
                              size_t len,
                              struct RsPowerLawFit *out);

/**
 * Creates a handle; nothing is computed until [`rs_simulation_run`].
 *
 * # Safety
 * `spec` must be readable, `out` writable. Release the handle with
 * [`rs_simulation_free`].
 */
enum RsStatus rs_simulation_new(const struct RsSimulationSpec *spec, struct RsSimulation **out);

/**
 * # Safety
 * `sim` must be null or a handle from [`rs_simulation_new`] not yet freed.
 */
void rs_simulation_free(struct RsSimulation *sim);

/**
 * Propagates every realization and averages.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum RsStatus rs_simulation_run(struct RsSimulation *sim);

/**
 * Number of grid points.
 *
 * # Safety
 * `sim` must be a live handle, `out` writable.
 */
enum RsStatus rs_simulation_len(const struct RsSimulation *sim, size_t *out);

/**
 * Copies the time grid, mean Rydberg fraction and its standard error into
 * caller buffers of `capacity` entries each. Any of the three may be null to
 * skip it.
 *
 * # Safety
 * `sim` must be a live handle; each non-null buffer valid for `capacity`
 * writes.
 */
enum RsStatus rs_simulation_trajectory(const struct RsSimulation *sim,
                                       double *times,
                                       double *f_r_mean,
                                       double *f_r_stderr,
                                       size_t capacity);

/**
 * Worst norm and energy drift over all realizations.
 *
 * # Safety
 * `sim` must be a live handle, outputs writable.
 */
enum RsStatus rs_simulation_drifts(const struct RsSimulation *sim, double *norm, double *energy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RYDBERG_SCALING_H */

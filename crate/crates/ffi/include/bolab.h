#ifndef BOLAB_H
#define BOLAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum BolabHalfLine {
  BOLAB_HALF_LINE_PLUS = 0,
  BOLAB_HALF_LINE_MINUS = 1,
} BolabHalfLine;

typedef enum BolabStatus {
  BOLAB_STATUS_OK = 0,
  BOLAB_STATUS_NULL_POINTER = 1,
  BOLAB_STATUS_INVALID_ARGUMENT = 2,
  BOLAB_STATUS_GRID_MISMATCH = 3,
  BOLAB_STATUS_NONZERO_MEAN = 4,
  BOLAB_STATUS_UNBOUNDED_SYMBOL = 5,
  BOLAB_STATUS_BUFFER_TOO_SMALL = 6,
  BOLAB_STATUS_PANIC = 7,
} BolabStatus;

/**
 * Opaque sampled field with its Fourier coefficients.
 */
typedef struct BolabField BolabField;

/**
 * Opaque periodic grid.
 */
typedef struct BolabGrid BolabGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *bolab_last_error(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum BolabStatus bolab_grid_new(size_t n_points, double length, struct BolabGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle from [`bolab_grid_new`] not yet freed.
 */
void bolab_grid_free(struct BolabGrid *grid);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t bolab_grid_n_points(const struct BolabGrid *grid);

/**
 * Builds a real field from `len == n_points` samples at `x_j = -L/2 + jL/n`.
 *
 * # Safety
 * `grid` must be a live handle, `values` must point to `len` doubles, `out` must be writable.
 */
enum BolabStatus bolab_field_from_real(const struct BolabGrid *grid,
                                       const double *values,
                                       size_t len,
                                       struct BolabField **out);

/**
 * # Safety
 * `field` must be null or a live field handle.
 */
void bolab_field_free(struct BolabField *field);

/**
 * Samples as interleaved `(re, im)` pairs; `capacity` counts doubles.
 *
 * # Safety
 * `field` must be a live handle and `out` must point to `capacity` writable doubles.
 */
enum BolabStatus bolab_field_values(const struct BolabField *field, double *out, size_t capacity);

/**
 * Coefficients `c_m` as interleaved pairs, slot `i` holding mode `m = i - n/2`.
 *
 * # Safety
 * As [`bolab_field_values`].
 */
enum BolabStatus bolab_field_coeffs(const struct BolabField *field, double *out, size_t capacity);

/**
 * # Safety
 * `field` must be a live handle and `out` writable; the result is a new handle.
 */
enum BolabStatus bolab_hilbert(const struct BolabField *field, struct BolabField **out);

/**
 * `D^alpha`; negative orders need a mean-zero field.
 *
 * # Safety
 * As [`bolab_hilbert`].
 */
enum BolabStatus bolab_fractional_derivative(const struct BolabField *field,
                                             double alpha,
                                             struct BolabField **out);

/**
 * # Safety
 * As [`bolab_hilbert`].
 */
enum BolabStatus bolab_free_evolve(const struct BolabField *field,
                                   double t,
                                   struct BolabField **out);

/**
 * # Safety
 * As [`bolab_hilbert`].
 */
enum BolabStatus bolab_project_half_line(const struct BolabField *field,
                                         enum BolabHalfLine side,
                                         struct BolabField **out);

/**
 * Littlewood–Paley block `Q_j`.
 *
 * # Safety
 * As [`bolab_hilbert`].
 */
enum BolabStatus bolab_lp_block(const struct BolabField *field, int32_t j, struct BolabField **out);

/**
 * # Safety
 * As [`bolab_hilbert`].
 */
enum BolabStatus bolab_lowpass_p0(const struct BolabField *field, struct BolabField **out);

/**
 * # Safety
 * `field` must be a live handle and `out` writable.
 */
enum BolabStatus bolab_sobolev_norm(const struct BolabField *field,
                                    double s,
                                    bool homogeneous,
                                    double *out);

/**
 * Pass `INFINITY` for an infinite exponent.
 */
bool bolab_is_one_admissible(double alpha, double p, double q);

/**
 * Writes one verdict byte (1 pass, 0 fail) per audit row into `verdicts` and the row count into `n_rows`.
 *
 * # Safety
 * `verdicts` must point to `capacity` writable bytes and `n_rows` must be writable.
 */
enum BolabStatus bolab_norm_family_audit(double s,
                                         uint32_t k,
                                         double eps,
                                         double delta,
                                         uint8_t *verdicts,
                                         size_t capacity,
                                         size_t *n_rows);

/**
 * `σ` in `V(t) = exp(iσ t ξ|ξ|)`.
 */
double bolab_dispersion_sign(void);

/**
 * `-2 Σ_{j=1..3} ξ_j (ξ_{j-1} - ξ_j)`.
 */
double bolab_illposed_phase(double xi0, double xi1, double xi2, double xi3);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOLAB_H */

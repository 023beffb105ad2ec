#ifndef RISMOD_H
#define RISMOD_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RismodStatus {
  RISMOD_STATUS_OK = 0,
  RISMOD_STATUS_CONFIG_ERROR = 1,
  RISMOD_STATUS_NUMERICAL_ERROR = 2,
  RISMOD_STATUS_UNDEFINED_PHASE = 3,
  RISMOD_STATUS_SCHEMA_ERROR = 4,
  RISMOD_STATUS_IO_ERROR = 5,
  RISMOD_STATUS_NULL_POINTER = 6,
  RISMOD_STATUS_PANIC = 7,
} RismodStatus;

typedef enum RismodScheme {
  RISMOD_SCHEME_PSK = 0,
  RISMOD_SCHEME_APSK = 1,
  RISMOD_SCHEME_QAPSK = 2,
} RismodScheme;

typedef enum RismodJob {
  RISMOD_JOB_CONSTELLATION = 0,
  RISMOD_JOB_CAPACITY = 1,
  RISMOD_JOB_SEP = 2,
  RISMOD_JOB_THEORY = 3,
} RismodJob;

/**
 * Opaque CSV artifact.
 */
typedef struct RismodArtifact RismodArtifact;

/**
 * Opaque received constellation.
 */
typedef struct RismodConstellation RismodConstellation;

/**
 * Link parameters. `aoa_phi` in radians, `ra_spacing_over_lambda` is `d/λ`.
 */
typedef struct RismodLink {
  size_t elements;
  size_t rx_antennas;
  double kappa;
  uint32_t phase_bits;
  double ra_spacing_over_lambda;
  double aoa_phi;
  double rho;
} RismodLink;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next `rismod_*` call on the same thread.
 */
const char *rismod_last_error(void);

/**
 * Library version, a static nul-terminated string.
 */
const char *rismod_version(void);

/**
 * Fills `link` with defaults: `d/λ = 0.5`, `φ = 0`, `ρ = 1`.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_link_default(size_t elements,
                                      size_t rx_antennas,
                                      double kappa,
                                      uint32_t phase_bits,
                                      struct RismodLink *link);

/**
 * `ρ′` and `κ′` of the single-antenna equivalent link.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_equivalent_link(const struct RismodLink *link,
                                         double *rho_prime,
                                         double *kappa_prime);

/**
 * Grid index of the `bits`-bit phase nearest to `arg(re + j·im)`.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_quantize_phase(double re, double im, uint32_t bits, uint32_t *index);

/**
 * `L_{1/2}(−x)` for `x >= 0`.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_laguerre_half(double x, double *out);

/**
 * A-PSK SEP approximation from `m / v` real block gains.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_sep_apsk_theory(const double *gains,
                                         size_t len,
                                         double rho_prime,
                                         size_t m,
                                         size_t v,
                                         double *out);

/**
 * QA-PSK SEP approximation from `len = sqrt(m / v)` gains per branch.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_sep_qapsk_theory(const double *gains_i,
                                          const double *gains_q,
                                          size_t len,
                                          double rho_prime,
                                          size_t m,
                                          size_t v,
                                          double *out);

/**
 * Constellation of channel `channel_index` drawn from `seed`. `v` is ignored
 * for PSK.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_constellation_draw(const struct RismodLink *link,
                                            enum RismodScheme scheme,
                                            size_t m,
                                            size_t v,
                                            uint64_t seed,
                                            uint64_t channel_index,
                                            struct RismodConstellation **out);

/**
 * Constellation built from the mean block gains of `link`.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_constellation_mean(const struct RismodLink *link,
                                            enum RismodScheme scheme,
                                            size_t m,
                                            size_t v,
                                            struct RismodConstellation **out);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
size_t rismod_constellation_len(const struct RismodConstellation *c);

/**
 * Copies the points into `re[0..cap]` and `im[0..cap]`; `cap` must be at
 * least the constellation size.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_constellation_points(const struct RismodConstellation *c,
                                              double *re,
                                              double *im,
                                              size_t cap);

/**
 * ML decision for `y` observed at equivalent SNR `rho_prime`.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_constellation_detect(const struct RismodConstellation *c,
                                              double y_re,
                                              double y_im,
                                              double rho_prime,
                                              size_t *index);

/**
 * Gauss-Hermite DCMC capacity in bits.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_constellation_capacity(const struct RismodConstellation *c,
                                                double rho_prime,
                                                size_t gh_order,
                                                double *bits);

/**
 * Releases the handle.
 *
 * # Safety
 * The handle must come from this library and not be used afterwards; null is a no-op.
 */
void rismod_constellation_free(struct RismodConstellation *c);

/**
 * Runs a job from a JSON config and returns its CSV artifact.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
enum RismodStatus rismod_run_job(enum RismodJob job,
                                 const char *config_json,
                                 size_t workers,
                                 struct RismodArtifact **out);

/**
 * CSV text of an artifact; valid while the handle lives.
 *
 * # Safety
 * Pointer arguments must be null or valid for the access described above.
 */
const char *rismod_artifact_csv(const struct RismodArtifact *a);

/**
 * Releases the handle.
 *
 * # Safety
 * The handle must come from this library and not be used afterwards; null is a no-op.
 */
void rismod_artifact_free(struct RismodArtifact *a);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISMOD_H */

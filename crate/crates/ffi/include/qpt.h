/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef QPT_H
#define QPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of doubles in the sixteen interleaved 4x4 output states.
 */
#define QPT_OUTPUTS_LEN ((16 * 16) * 2)

typedef enum QptStatus {
  QPT_STATUS_OK = 0,
  QPT_STATUS_NULL_POINTER = 1,
  QPT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Inconsistent data, e.g. non-Hermitian input states.
   */
  QPT_STATUS_CONSISTENCY = 3,
  QPT_STATUS_UNSUPPORTED = 4,
  QPT_STATUS_BUFFER_TOO_SMALL = 5,
  QPT_STATUS_PANIC = 6,
} QptStatus;

typedef enum QptGateKind {
  QPT_GATE_KIND_IDENTITY = 0,
  QPT_GATE_KIND_SQRT_ISWAP = 1,
  QPT_GATE_KIND_XY_EVOLUTION = 2,
  QPT_GATE_KIND_DETUNED_IDLE = 3,
} QptGateKind;

/**
 * Complex matrix handle.
 */
typedef struct QptMatrix QptMatrix;

/**
 * Ordered set of decoherence models.
 */
typedef struct QptModels QptModels;

/**
 * Gate description. For `SqrtIswap` the duration is ignored and fixed to
 * `π/2S`; `detuning` is used only by `DetunedIdle`.
 */
typedef struct QptGate {
  enum QptGateKind kind;
  double coupling;
  double detuning;
  double duration;
} QptGate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *qpt_last_error_message(void);

const char *qpt_version(void);

struct QptModels *qpt_models_new(void);

/**
 * # Safety
 * `models` must be null or a handle from [`qpt_models_new`] not yet freed.
 */
void qpt_models_free(struct QptModels *models);

/**
 * Local Bloch equations; `dephasing_rate_k` is `1/T2` of qubit k.
 *
 * # Safety
 * `models` must be a live handle.
 */
enum QptStatus qpt_models_add_local(struct QptModels *models,
                                    double gamma_down_1,
                                    double gamma_up_1,
                                    double dephasing_rate_1,
                                    double gamma_down_2,
                                    double gamma_up_2,
                                    double dephasing_rate_2);

/**
 * # Safety
 * `models` must be a live handle.
 */
enum QptStatus qpt_models_add_correlated_dephasing(struct QptModels *models,
                                                   double gamma_1,
                                                   double gamma_2,
                                                   double kappa);

/**
 * # Safety
 * `models` must be a live handle.
 */
enum QptStatus qpt_models_add_noisy_coupling(struct QptModels *models, double gamma_s);

/**
 * # Safety
 * `models` must be a live handle.
 */
enum QptStatus qpt_models_add_detuned_noisy_coupling(struct QptModels *models,
                                                     double gamma_s_prime);

/**
 * Pauli-basis χ of the gate under the given models (null for none).
 *
 * # Safety
 * `gate` must point to a valid gate, `models` must be null or live, and
 * `out` must be writable. The result is released with [`qpt_matrix_free`].
 */
enum QptStatus qpt_simulate_chi(const struct QptGate *gate,
                                const struct QptModels *models,
                                struct QptMatrix **out);

/**
 * Pauli-basis χ of the ideal gate.
 *
 * # Safety
 * As for [`qpt_simulate_chi`].
 */
enum QptStatus qpt_ideal_chi(const struct QptGate *gate, struct QptMatrix **out);

/**
 * Writes the sixteen tomography output states into `buf` as interleaved
 * `re, im` pairs, state `4 n1 + n2` first in row-major order.
 *
 * # Safety
 * `buf` must hold `len` doubles; `len` must be at least
 * [`QPT_OUTPUTS_LEN`].
 */
enum QptStatus qpt_tomography_outputs(const struct QptGate *gate,
                                      const struct QptModels *models,
                                      double *buf,
                                      size_t len);

/**
 * Standard two-qubit tomography: reconstructs the Pauli-basis χ from the
 * sixteen output states laid out as in [`qpt_tomography_outputs`].
 *
 * # Safety
 * `outputs` must hold `len` doubles and `out` must be writable.
 */
enum QptStatus qpt_extract_chi(const double *outputs, size_t len, struct QptMatrix **out);

/**
 * Fingerprint report of a Pauli-basis χ for `gate`, as a JSON string
 * released with [`qpt_string_free`]. `noise_sigma` is the standard
 * deviation of entry noise (0 for exact data).
 *
 * # Safety
 * `chi` and `gate` must be valid and `out` writable.
 */
enum QptStatus qpt_fingerprint_json(const struct QptMatrix *chi,
                                    const struct QptGate *gate,
                                    bool refine,
                                    double noise_sigma,
                                    char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void qpt_string_free(char *s);

/**
 * `Tr|M|` of a Hermitian matrix.
 *
 * # Safety
 * `m` must be live and `out` writable.
 */
enum QptStatus qpt_trace_norm(const struct QptMatrix *m, double *out);

/**
 * Nonlocality measure `ε′_NL` of the combined λ-matrix of the models.
 *
 * # Safety
 * `models` must be live and `out` writable.
 */
enum QptStatus qpt_epsilon_nl_prime(const struct QptModels *models, double *out);

/**
 * Number of rows (matrices are square), or 0 for null.
 *
 * # Safety
 * `m` must be null or live.
 */
size_t qpt_matrix_dim(const struct QptMatrix *m);

/**
 * # Safety
 * `m` must be live; `re` and `im` writable.
 */
enum QptStatus qpt_matrix_get(const struct QptMatrix *m,
                              size_t row,
                              size_t col,
                              double *re,
                              double *im);

/**
 * Copies the matrix into `buf` as interleaved `re, im` in row-major order.
 *
 * # Safety
 * `m` must be live and `buf` must hold `len` doubles.
 */
enum QptStatus qpt_matrix_copy(const struct QptMatrix *m, double *buf, size_t len);

/**
 * # Safety
 * `m` must be null or a matrix handle not yet freed.
 */
void qpt_matrix_free(struct QptMatrix *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPT_H */

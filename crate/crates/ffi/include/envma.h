#ifndef ENVMA_H
#define ENVMA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EnvmaStatus {
  ENVMA_STATUS_OK = 0,
  ENVMA_STATUS_NULL_POINTER = 1,
  ENVMA_STATUS_INVALID_DIMENSION = 2,
  ENVMA_STATUS_NOT_SYMMETRIC = 3,
  ENVMA_STATUS_NOT_POSITIVE_DEFINITE = 4,
  ENVMA_STATUS_NO_CONVERGENCE = 5,
  ENVMA_STATUS_INVALID_ARGUMENT = 6,
  ENVMA_STATUS_IO = 7,
  ENVMA_STATUS_PARSE = 8,
  ENVMA_STATUS_MAX_ITER_EXCEEDED = 9,
  ENVMA_STATUS_LINEAR_SOLVE_FAILURE = 10,
  ENVMA_STATUS_BUFFER_TOO_SMALL = 11,
  ENVMA_STATUS_PANIC = 12,
} EnvmaStatus;

/**
 * Envelope value with its optimal slope and intercept.
 */
typedef struct EnvmaCertificate EnvmaCertificate;

/**
 * Real symmetric `2n × 2n` matrix.
 */
typedef struct EnvmaMatrix EnvmaMatrix;

/**
 * Box `E_θ` for a fixed complex dimension.
 */
typedef struct EnvmaThetaBox EnvmaThetaBox;

/**
 * Summary of a solve started from a problem file.
 */
typedef struct EnvmaSolveSummary {
  size_t iterations;
  double final_residual;
  /**
   * NaN when the problem has no exact solution.
   */
  double max_error;
} EnvmaSolveSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *envma_status_message(enum EnvmaStatus status);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes. Returns the full message length without the
 * terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t envma_last_error(char *buf, size_t len);

/**
 * Creates the box for `theta` and complex dimension `n`. `theta > 1` is
 * replaced by `1 / theta`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum EnvmaStatus envma_theta_box_new(double theta, size_t n, struct EnvmaThetaBox **out);

/**
 * # Safety
 * `b` must be null or a handle from [`envma_theta_box_new`] not yet freed.
 */
void envma_theta_box_free(struct EnvmaThetaBox *b);

/**
 * # Safety
 * `b` must be a live box handle and `out` writable.
 */
enum EnvmaStatus envma_theta_box_theta(const struct EnvmaThetaBox *b, double *out);

/**
 * Creates a matrix from `dim * dim` row-major entries. Entries are
 * symmetrized after a symmetry check.
 *
 * # Safety
 * `entries` must point to `dim * dim` readable values and `out` must be
 * writable.
 */
enum EnvmaStatus envma_matrix_new(size_t dim, const double *entries, struct EnvmaMatrix **out);

/**
 * Reads a matrix file (`sym <2n>` or `herm <n>` header).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum EnvmaStatus envma_matrix_read(const char *path, struct EnvmaMatrix **out);

/**
 * # Safety
 * `m` must be null or a live matrix handle.
 */
void envma_matrix_free(struct EnvmaMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
enum EnvmaStatus envma_matrix_dim(const struct EnvmaMatrix *m, size_t *out);

/**
 * `F(M)`, the geometric mean of the Hermitian eigenvalues of `proj(M)`.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
enum EnvmaStatus envma_operator_f(const struct EnvmaMatrix *m, double *out);

/**
 * Evaluates the envelope and returns its certificate.
 *
 * # Safety
 * `m` and `b` must be live handles and `out` writable.
 */
enum EnvmaStatus envma_envelope_eval(const struct EnvmaMatrix *m,
                                     const struct EnvmaThetaBox *b,
                                     struct EnvmaCertificate **out);

/**
 * # Safety
 * `c` must be null or a live certificate handle.
 */
void envma_certificate_free(struct EnvmaCertificate *c);

/**
 * # Safety
 * `c` must be a live certificate handle and `out` writable.
 */
enum EnvmaStatus envma_certificate_value(const struct EnvmaCertificate *c, double *out);

/**
 * # Safety
 * `c` must be a live certificate handle and `out` writable.
 */
enum EnvmaStatus envma_certificate_intercept(const struct EnvmaCertificate *c, double *out);

/**
 * Copies the `n` slope eigenvalues into `buf`.
 *
 * # Safety
 * `c` must be a live certificate handle; `buf` must hold `len` values.
 */
enum EnvmaStatus envma_certificate_slope_eigenvalues(const struct EnvmaCertificate *c,
                                                     double *buf,
                                                     size_t len);

/**
 * Copies the `2n × 2n` slope matrix, row-major, into `buf`.
 *
 * # Safety
 * `c` must be a live certificate handle; `buf` must hold `len` values.
 */
enum EnvmaStatus envma_certificate_slope_matrix(const struct EnvmaCertificate *c,
                                                double *buf,
                                                size_t len);

/**
 * Intercept `g(p)` for the `n` slope eigenvalues in `p`.
 *
 * # Safety
 * `p` must point to `n` readable values, `b` must be a live handle and
 * `out` writable.
 */
enum EnvmaStatus envma_conjugate_intercept(const double *p,
                                           size_t n,
                                           const struct EnvmaThetaBox *b,
                                           double *out);

/**
 * Solves the problem in `config_path` and writes `solution.csv`,
 * `residual.csv` and `report.txt` into `out_dir`. Returns
 * `ENVMA_STATUS_MAX_ITER_EXCEEDED` when the iteration cap was hit; the
 * artifacts and summary are still produced.
 *
 * # Safety
 * Both paths must be NUL-terminated strings; `summary` may be null.
 */
enum EnvmaStatus envma_solve_config(const char *config_path,
                                    const char *out_dir,
                                    struct EnvmaSolveSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENVMA_H */

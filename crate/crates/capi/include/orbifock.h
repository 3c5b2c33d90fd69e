/* C interface of the orbifock workbench. */

#ifndef ORBIFOCK_H
#define ORBIFOCK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum OfStatus {
  OF_STATUS_OK = 0,
  OF_STATUS_INVALID_ARGUMENT = 1,
  OF_STATUS_COMPUTE_ERROR = 2,
  OF_STATUS_VERIFY_FAILED = 3,
  OF_STATUS_PANIC = 4,
} OfStatus;

/**
 * Opaque handle to an exact Laurent series in fractional powers.
 */
typedef struct OfSeries OfSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The pointer is
 * valid until the next failing call on the same thread; do not free it.
 */
const char *of_last_error(void);

/**
 * Library version as a static string; do not free it.
 */
const char *of_version(void);

/**
 * Release a string allocated by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned through an out-parameter of
 * this library, or null.
 */
void of_string_free(char *s);

/**
 * Parse the textual series format, e.g.
 * `3/2*z^(-1/2) + z^(1) @window[-1/2,4]`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum OfStatus of_series_parse(const char *text, struct OfSeries **out);

/**
 * Render a series handle in the textual format.
 *
 * # Safety
 * `s` must be a live handle from this library; `out` a valid pointer.
 */
enum OfStatus of_series_to_string(const struct OfSeries *s, char **out);

/**
 * Termwise sum on the intersection window.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` a valid pointer.
 */
enum OfStatus of_series_add(const struct OfSeries *a,
                            const struct OfSeries *b,
                            struct OfSeries **out);

/**
 * Cauchy product with the pessimistic window rule.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` a valid pointer.
 */
enum OfStatus of_series_mul(const struct OfSeries *a,
                            const struct OfSeries *b,
                            struct OfSeries **out);

/**
 * Formal substitution `a(b)`; `b` must have strictly positive exponents.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` a valid pointer.
 */
enum OfStatus of_series_compose(const struct OfSeries *a,
                                const struct OfSeries *b,
                                struct OfSeries **out);

/**
 * Termwise `z`-derivative; the window shifts down by one.
 *
 * # Safety
 * `s` must be a live handle; `out` a valid pointer.
 */
enum OfStatus of_series_derivative(const struct OfSeries *s, struct OfSeries **out);

/**
 * Coefficient of `z^(-1)` as an exact rational string; fails when the
 * window does not cover it.
 *
 * # Safety
 * `s` must be a live handle; `out` a valid pointer.
 */
enum OfStatus of_series_residue(const struct OfSeries *s, char **out);

/**
 * Release a series handle.
 *
 * # Safety
 * `s` must be a live handle from this library, or null.
 */
void of_series_free(struct OfSeries *s);

/**
 * The expansion coefficients of the quadratic correction operator through
 * the given total degree, as JSON.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OfStatus of_delta_table(uint32_t order, char **out);

/**
 * Run a named verification suite with an optional JSON options object
 * (fields `deg`, `modes`, `order`, `slice`, `pole_bound`, `rho`). Returns
 * `Ok` when every check passed and `VerifyFailed` when at least one failed;
 * the JSON report is written either way.
 *
 * # Safety
 * `suite` must be valid; `params_json` may be null; `out` must be valid.
 */
enum OfStatus of_verify(const char *suite, const char *params_json, char **out);

/**
 * Coinvariant dimension table for a JSON cover configuration; dispatches to
 * the Heisenberg or affine engine by the module specs.
 *
 * # Safety
 * `config_json` must be valid; `out` must be valid.
 */
enum OfStatus of_blocks(const char *config_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORBIFOCK_H */

#ifndef GRAPHWAVE_H
#define GRAPHWAVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GwStatus {
  GW_STATUS_OK = 0,
  GW_STATUS_NULL_POINTER = 1,
  GW_STATUS_INVALID_INPUT = 2,
  GW_STATUS_INSUFFICIENT_SAMPLES = 3,
  GW_STATUS_DOMAIN = 4,
  GW_STATUS_PARSE = 5,
  GW_STATUS_IO = 6,
  GW_STATUS_BUFFER_TOO_SMALL = 7,
  GW_STATUS_PANIC = 8,
} GwStatus;

/**
 * Extracted modes.
 */
typedef struct GwModes GwModes;

/**
 * Node-by-time table of real samples.
 */
typedef struct GwPanel GwPanel;

/**
 * Result of graph recovery.
 */
typedef struct GwRecovered GwRecovered;

/**
 * Recovery settings. `sqrt_c <= 0` means the wave speed is unknown;
 * `amp_norm_tol < 0` selects the relative default.
 */
typedef struct GwRecoveryOptions {
  size_t n_pairs;
  size_t lag;
  bool normalize_modes;
  bool positivize;
  double sqrt_c;
  double amp_norm_tol;
  size_t validation_horizon;
  bool retry;
} GwRecoveryOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL,
 * or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gw_last_error_message(char *buf, size_t len);

/**
 * Builds a panel from `n * len` node-major samples (`data[x * len + i]` is
 * node `x` at time `t_start + i`).
 *
 * # Safety
 * `data` must point to `n * len` readable doubles; `out` must be writable.
 */
enum GwStatus gw_panel_new(const double *data,
                           size_t n,
                           size_t len,
                           int64_t t_start,
                           struct GwPanel **out);

/**
 * Reads a panel CSV with header `t,<labels>`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GwStatus gw_panel_from_csv(const char *path, struct GwPanel **out);

/**
 * Wave on the `n`-node path graph from the seeded noisy ramp, sampled at
 * `t = 1..=steps`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GwStatus gw_simulate_path_wave(size_t n,
                                    double sqrt_c,
                                    size_t steps,
                                    uint64_t seed,
                                    double noise,
                                    struct GwPanel **out);

/**
 * # Safety
 * `panel` must be null or a live handle.
 */
enum GwStatus gw_panel_shape(const struct GwPanel *panel, size_t *n, size_t *len, int64_t *t_start);

/**
 * Sample of node `x` (0-based) at time `t`.
 *
 * # Safety
 * `panel` must be null or a live handle; `out` must be writable.
 */
enum GwStatus gw_panel_value(const struct GwPanel *panel, size_t x, int64_t t, double *out);

/**
 * # Safety
 * `panel` must be null or a handle not yet freed.
 */
void gw_panel_free(struct GwPanel *panel);

/**
 * Library defaults for `n_pairs` pairs and `lag` shifts.
 */
struct GwRecoveryOptions gw_recovery_options_default(size_t n_pairs, size_t lag);

/**
 * # Safety
 * `panel` and `options` must be null or valid; `out` must be writable.
 */
enum GwStatus gw_recover_graph(const struct GwPanel *panel,
                               const struct GwRecoveryOptions *options,
                               struct GwRecovered **out);

/**
 * # Safety
 * `graph` must be null or a live handle.
 */
enum GwStatus gw_recovered_node_count(const struct GwRecovered *graph, size_t *out);

/**
 * Weight between nodes `x` and `y` (0-based).
 *
 * # Safety
 * `graph` must be null or a live handle; `out` must be writable.
 */
enum GwStatus gw_recovered_weight(const struct GwRecovered *graph, size_t x, size_t y, double *out);

/**
 * Copies the dense row-major weight matrix into `buf` (`len >= n * n`).
 *
 * # Safety
 * `graph` must be null or a live handle; `buf` must hold `len` doubles.
 */
enum GwStatus gw_recovered_weights(const struct GwRecovered *graph, double *buf, size_t len);

/**
 * Whether the held-out validation flagged the fit.
 *
 * # Safety
 * `graph` must be null or a live handle; `out` must be writable.
 */
enum GwStatus gw_recovered_has_advisory(const struct GwRecovered *graph, bool *out);

/**
 * Graph and diagnostics as a JSON string. Free with [`gw_string_free`].
 *
 * # Safety
 * `graph` must be null or a live handle; `out` must be writable.
 */
enum GwStatus gw_recovered_to_json(const struct GwRecovered *graph, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void gw_string_free(char *s);

/**
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void gw_recovered_free(struct GwRecovered *graph);

/**
 * Stationary mode extraction with `n_pairs` pairs and at least `lag` shifts.
 *
 * # Safety
 * `panel` must be null or a live handle; `out` must be writable.
 */
enum GwStatus gw_extract_stationary(const struct GwPanel *panel,
                                    size_t n_pairs,
                                    size_t lag,
                                    bool normalize,
                                    struct GwModes **out);

/**
 * # Safety
 * `modes` must be null or a live handle; `out` must be writable.
 */
enum GwStatus gw_modes_len(const struct GwModes *modes, size_t *out);

/**
 * Mode `j` in canonical order (constant first, then conjugate pairs).
 *
 * # Safety
 * `modes` must be null or a live handle; `re` and `im` must be writable.
 */
enum GwStatus gw_modes_get(const struct GwModes *modes, size_t j, double *re, double *im);

/**
 * # Safety
 * `modes` must be null or a handle not yet freed.
 */
void gw_modes_free(struct GwModes *modes);

/**
 * Roots of `coeffs[0] + coeffs[1] z + … + coeffs[len-1] z^(len-1)`.
 * Writes up to `cap` roots and the degree to `count`; returns
 * `GW_STATUS_BUFFER_TOO_SMALL` (with `count` set) when `cap` is short.
 *
 * # Safety
 * `coeffs` must hold `len` doubles; `re` and `im` must hold `cap` doubles.
 */
enum GwStatus gw_polynomial_roots(const double *coeffs,
                                  size_t len,
                                  double *re,
                                  double *im,
                                  size_t cap,
                                  size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHWAVE_H */

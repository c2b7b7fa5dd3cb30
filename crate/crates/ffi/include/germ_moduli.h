#ifndef GERM_MODULI_H
#define GERM_MODULI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero is success.
typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_ARGUMENT = 1,
  GM_STATUS_INVALID_UTF8 = 2,
  GM_STATUS_PARSE = 3,
  GM_STATUS_INVALID_ARGUMENT = 4,
  GM_STATUS_UNSUPPORTED_GROUP = 5,
  // A colength or Milnor number was not certified within the order bound.
  GM_STATUS_NOT_CERTIFIED = 6,
  GM_STATUS_BUFFER_TOO_SMALL = 7,
  GM_STATUS_INTERNAL = 8,
  GM_STATUS_PANIC = 9,
} GmStatus;

// An owned map-germ.
typedef struct GmGerm GmGerm;

// Route A summary.
typedef struct GmModuli {
  // Quotient dimension at the top order.
  size_t top;
  // True when the last `window + 1` values agree.
  bool stabilized;
  // The stable value; meaningful only when `stabilized`.
  size_t value;
  uint32_t k_max;
} GmModuli;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on this thread.
const char *gm_last_error(void);

// Library version, a static string.
const char *gm_version(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void gm_string_free(char *s);

// Parses comma-separated components. `source_vars` and `target_vars` are
// comma-separated name lists, or null for the defaults.
//
// # Safety
// String arguments must be null or NUL-terminated; `out` must be writable.
enum GmStatus gm_germ_parse(const char *components,
                            const char *source_vars,
                            const char *target_vars,
                            struct GmGerm **out);

// Releases a germ. Null is ignored.
//
// # Safety
// `g` must come from `gm_germ_parse` and not have been freed.
void gm_germ_free(struct GmGerm *g);

// Source dimension `n`, or 0 for null.
//
// # Safety
// `g` must be null or a live germ.
size_t gm_germ_source_dim(const struct GmGerm *g);

// Target dimension `p`, or 0 for null.
//
// # Safety
// `g` must be null or a live germ.
size_t gm_germ_target_dim(const struct GmGerm *g);

// Canonical text of the germ, e.g. `(x, x*y + y^5)`. Free with
// `gm_string_free`.
//
// # Safety
// `g` must be a live germ; `out` must be writable.
enum GmStatus gm_germ_format(const struct GmGerm *g, char **out);

// Route A moduli dimension for `k = 2..=k_max`. `group_name` is one of
// R, C, L, A, K; `side` is "source", "target", "none" or null.
//
// # Safety
// `g` must be a live germ; strings NUL-terminated; `out` writable.
enum GmStatus gm_moduli_dimension(const struct GmGerm *g,
                                  const char *group_name,
                                  const char *side,
                                  uint32_t k_max,
                                  struct GmModuli *out);

// Weak quasihomogeneity for a volume-constrained group. On success
// `*found` tells whether a certificate exists. When found and the buffers
// are non-null, the source weights go to `weights` (length `n`) and the
// target degrees to `degrees` (length `p`).
//
// # Safety
// `g` must be a live germ; `found` writable; buffers null or of the
// stated lengths.
enum GmStatus gm_wqh(const struct GmGerm *g,
                     const char *group_name,
                     const char *side,
                     bool *found,
                     int64_t *weights,
                     size_t weights_len,
                     int64_t *degrees,
                     size_t degrees_len);

// Milnor number (Le-Greuel for complete intersections), certified by
// jet order `k_max`.
//
// # Safety
// `g` must be a live germ; `out` writable.
enum GmStatus gm_milnor(const struct GmGerm *g, uint32_t k_max, size_t *out);

// Tjurina number, certified by jet order `k_max`.
//
// # Safety
// `g` must be a live germ; `out` writable.
enum GmStatus gm_tjurina(const struct GmGerm *g, uint32_t k_max, size_t *out);

// Runs one CLI command with `--format json` and hands back the report.
// `argv` excludes the program name. `exit_code` receives the CLI exit
// status (0, 1 or 2); `json` receives stdout, to be freed with
// `gm_string_free`.
//
// # Safety
// `argv` must point to `argc` NUL-terminated strings; outputs writable.
enum GmStatus gm_report_json(const char *const *argv, size_t argc, int32_t *exit_code, char **json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GERM_MODULI_H */

#ifndef ARCHPROB_H
#define ARCHPROB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ArchprobStatus {
  ARCHPROB_STATUS_OK = 0,
  ARCHPROB_STATUS_NULL_POINTER = 1,
  ARCHPROB_STATUS_INVALID_UTF8 = 2,
  ARCHPROB_STATUS_PARSE = 3,
  ARCHPROB_STATUS_VALIDATION = 4,
  ARCHPROB_STATUS_USAGE = 5,
  ARCHPROB_STATUS_IMPOSSIBLE_EVIDENCE = 6,
  ARCHPROB_STATUS_BUFFER_TOO_SMALL = 7,
  ARCHPROB_STATUS_INTERNAL = 8,
  ARCHPROB_STATUS_DATA = 9,
} ArchprobStatus;

/**
 * A parsed and validated architecture document.
 */
typedef struct ArchprobArchitecture ArchprobArchitecture;

/**
 * A compiled Bayesian network.
 */
typedef struct ArchprobNetwork ArchprobNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *archprob_last_error_message(void);

/**
 * Parses and validates an architecture document.
 */
enum ArchprobStatus archprob_architecture_parse(const char *text,
                                                struct ArchprobArchitecture **out);

void archprob_architecture_free(struct ArchprobArchitecture *arch);

/**
 * Canonical document text; free with [`archprob_string_free`].
 */
enum ArchprobStatus archprob_architecture_serialize(const struct ArchprobArchitecture *arch,
                                                    char **out);

void archprob_string_free(char *s);

enum ArchprobStatus archprob_architecture_compile(const struct ArchprobArchitecture *arch,
                                                  struct ArchprobNetwork **out);

void archprob_network_free(struct ArchprobNetwork *net);

/**
 * Adds a monitor and weighted voter behind `component`. `voter_id` may be
 * null for the default id `Voter`. The input handle is left unchanged.
 */
enum ArchprobStatus archprob_apply_n_version(const struct ArchprobArchitecture *arch,
                                             const char *component,
                                             const char *monitor_id,
                                             double monitor_p_high,
                                             double weight,
                                             const char *voter_id,
                                             struct ArchprobArchitecture **out);

/**
 * Downstream components of `component`, newline separated; free with
 * [`archprob_string_free`].
 */
enum ArchprobStatus archprob_change_impact(const struct ArchprobArchitecture *arch,
                                           const char *component,
                                           char **out);

/**
 * `P(target = H | evidence)` by variable elimination. `evidence` may be null.
 */
enum ArchprobStatus archprob_network_evaluate(const struct ArchprobNetwork *net,
                                              const char *target,
                                              const char *evidence,
                                              double *out_p_high);

/**
 * Same query by full enumeration; for small networks and cross-checks.
 */
enum ArchprobStatus archprob_network_marginal_brute_force(const struct ArchprobNetwork *net,
                                                          const char *target,
                                                          const char *evidence,
                                                          double *out_p_high);

/**
 * Sweeps the selected rows over `[from, to]` and writes grid points into
 * `out_t` / `out_p_high`, each of `capacity` elements. `out_len` receives
 * the number of points; with `BufferTooSmall` it holds the size needed.
 */
enum ArchprobStatus archprob_network_sweep(const struct ArchprobNetwork *net,
                                           const char *target,
                                           const char *vary,
                                           const char *evidence,
                                           double from,
                                           double to,
                                           double step,
                                           double *out_t,
                                           double *out_p_high,
                                           size_t capacity,
                                           size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARCHPROB_H */

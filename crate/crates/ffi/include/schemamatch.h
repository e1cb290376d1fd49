#ifndef SCHEMAMATCH_H
#define SCHEMAMATCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SmStatus {
  SM_STATUS_OK = 0,
  SM_STATUS_NULL_POINTER = 1,
  SM_STATUS_INVALID_UTF8 = 2,
  SM_STATUS_IO = 3,
  SM_STATUS_MALFORMED_INPUT = 4,
  SM_STATUS_INVALID_CONFIG = 5,
  SM_STATUS_UNKNOWN_ATTRIBUTE = 6,
  SM_STATUS_DUPLICATE_CONFIRMATION = 7,
  SM_STATUS_INSUFFICIENT_DATA = 8,
  SM_STATUS_PANIC = 99,
} SmStatus;

typedef struct SmDataset SmDataset;

typedef struct SmSession SmSession;

typedef struct SmConfig {
  double ling_weights[3];
  double weights[4];
  size_t top_n;
  size_t bins;
  uint64_t seed;
} SmConfig;

typedef struct SmPairScore {
  double dk;
  double lin;
  double uni;
  double mul;
  double final_score;
} SmPairScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *sm_last_error_message(void);

struct SmConfig sm_config_default(void);

/**
 * # Safety
 * `path` and `name` must be NUL-terminated strings; `out` must be writable.
 */
enum SmStatus sm_dataset_load(const char *path, const char *name, struct SmDataset **out);

/**
 * # Safety
 * `csv` and `name` must be NUL-terminated strings; `out` must be writable.
 */
enum SmStatus sm_dataset_from_csv(const char *csv, const char *name, struct SmDataset **out);

/**
 * Number of attributes, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t sm_dataset_attribute_count(const struct SmDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t sm_dataset_row_count(const struct SmDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void sm_dataset_free(struct SmDataset *ds);

/**
 * Starts a session over copies of both datasets. `cfg` and `rules_json` may
 * be null for defaults.
 *
 * # Safety
 * Handles must be live, strings NUL-terminated, `out` writable.
 */
enum SmStatus sm_session_new(const struct SmDataset *source,
                             const struct SmDataset *dest,
                             const struct SmConfig *cfg,
                             const char *rules_json,
                             struct SmSession **out);

/**
 * # Safety
 * `session` must be live; strings NUL-terminated.
 */
enum SmStatus sm_session_confirm(struct SmSession *session,
                                 const char *source_attr,
                                 const char *dest_attr);

/**
 * # Safety
 * `session` must be live; strings NUL-terminated.
 */
enum SmStatus sm_session_reject(struct SmSession *session,
                                const char *source_attr,
                                const char *dest_attr);

/**
 * # Safety
 * `session` must be live; strings NUL-terminated; `out` writable.
 */
enum SmStatus sm_session_pair_score(const struct SmSession *session,
                                    const char *source_attr,
                                    const char *dest_attr,
                                    struct SmPairScore *out);

/**
 * Pending suggestions as JSON; free the string with [`sm_string_free`].
 *
 * # Safety
 * `session` must be live; `out` writable.
 */
enum SmStatus sm_session_suggestions_json(const struct SmSession *session,
                                          size_t top_n,
                                          char **out);

/**
 * Full score matrix as CSV; free the string with [`sm_string_free`].
 *
 * # Safety
 * `session` must be live; `out` writable.
 */
enum SmStatus sm_session_matrix_csv(const struct SmSession *session, char **out);

/**
 * # Safety
 * `session` must be null or a handle not yet freed.
 */
void sm_session_free(struct SmSession *session);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sm_string_free(char *s);

/**
 * # Safety
 * Strings NUL-terminated; `out` writable.
 */
enum SmStatus sm_sim_lev(const char *a, const char *b, double *out);

/**
 * # Safety
 * Strings NUL-terminated; `out` writable.
 */
enum SmStatus sm_edit_distance(const char *a, const char *b, size_t *out);

/**
 * # Safety
 * Strings NUL-terminated; `out` writable.
 */
enum SmStatus sm_monge_elkan(const char *a, const char *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHEMAMATCH_H */

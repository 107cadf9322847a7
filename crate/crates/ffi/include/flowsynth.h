#ifndef FLOWSYNTH_H
#define FLOWSYNTH_H

/* Generated by cbindgen from the flowsynth-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Universe semantics selector.
 */
typedef enum FsMode {
  /**
   * Outputs replace the state.
   */
  FsPipelining = 0,
  /**
   * Outputs are unioned into the state.
   */
  FsAccumulating = 1,
} FsMode;

/**
 * Status codes returned by fallible functions.
 */
typedef enum FsStatus {
  /**
   * Operation succeeded.
   */
  FsOk = 0,
  /**
   * A domain or semantic error; see `fs_last_error`.
   */
  FsErrDomain = 1,
  /**
   * An I/O or parse error; see `fs_last_error`.
   */
  FsErrParse = 2,
  /**
   * A null pointer or invalid UTF-8 argument.
   */
  FsErrArgument = 3,
} FsStatus;

/**
 * Opaque domain-model handle.
 */
typedef struct FsDomain FsDomain;

/**
 * Opaque synthesis-result handle.
 */
typedef struct FsResult FsResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread, or null if none.
 * The pointer stays valid until the next failing call on the thread;
 * do not free it.
 */
const char *fs_last_error(void);

/**
 * Load the bundled 22-service example domain. Never fails.
 */
struct FsDomain *fs_domain_bundled(void);

/**
 * Load a domain model from a JSON file. Returns null on failure; see
 * `fs_last_error`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct FsDomain *fs_domain_load_file(const char *path);

/**
 * Number of services in the domain.
 *
 * # Safety
 * `domain` must be a live handle from `fs_domain_bundled`/`fs_domain_load_file`.
 */
uintptr_t fs_domain_service_count(const struct FsDomain *domain);

/**
 * Release a domain handle. Null is a no-op.
 *
 * # Safety
 * `domain` must be null or a live handle; it must not be used afterwards.
 */
void fs_domain_free(struct FsDomain *domain);

/**
 * Synthesize workflows between a source and a sink service, under an
 * optional constraint (SLTL text, or null for none). On success writes a
 * result handle to `out_result` and returns `FsOk`.
 *
 * # Safety
 * `domain` must be a live handle; `source`/`sink` valid strings;
 * `constraint` null or a valid string; `out_result` a valid pointer.
 */
enum FsStatus fs_synthesize(const struct FsDomain *domain,
                            const char *source,
                            const char *sink,
                            const char *constraint,
                            uintptr_t max_depth,
                            enum FsMode mode,
                            bool filter_permutations,
                            struct FsResult **out_result);

/**
 * Number of solutions in a result. Null yields 0.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
uintptr_t fs_result_solution_count(const struct FsResult *result);

/**
 * Whether the search hit a resource cap.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
bool fs_result_truncated(const struct FsResult *result);

/**
 * The services of solution `index` as a `" -> "`-joined string, or null
 * if out of range. Free with `fs_string_free`.
 *
 * # Safety
 * `result` must be a live handle.
 */
char *fs_result_solution(const struct FsResult *result, uintptr_t index);

/**
 * The whole result as a JSON document. Free with `fs_string_free`.
 *
 * # Safety
 * `result` must be a live handle.
 */
char *fs_result_json(const struct FsResult *result);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string obtained from this library.
 */
void fs_string_free(char *s);

/**
 * Release a result handle. Null is a no-op.
 *
 * # Safety
 * `result` must be null or a live handle; it must not be used afterwards.
 */
void fs_result_free(struct FsResult *result);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FLOWSYNTH_H */

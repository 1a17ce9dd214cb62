#ifndef CRS_H
#define CRS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum CrsStatus {
  CRS_STATUS_OK = 0,
  CRS_STATUS_NULL_POINTER = 1,
  CRS_STATUS_INVALID_UTF8 = 2,
  CRS_STATUS_PARSE_ERROR = 3,
  CRS_STATUS_TERM_ERROR = 4,
  CRS_STATUS_INVALID_ARGUMENT = 5,
  CRS_STATUS_INTERNAL = 6,
} CrsStatus;

/*
 Outcome of a confluence check.
 */
typedef enum CrsVerdict {
  CRS_VERDICT_CONFLUENT = 0,
  CRS_VERDICT_NOT_CONFLUENT = 1,
  CRS_VERDICT_UNKNOWN = 2,
} CrsVerdict;

/*
 Three-valued answer of a decision query.
 */
typedef enum CrsAnswer {
  CRS_ANSWER_YES = 0,
  CRS_ANSWER_NO = 1,
  CRS_ANSWER_UNDECIDED = 2,
} CrsAnswer;

/*
 A parsed system together with its budget and cached analysis.
 */
typedef struct CrsHandle CrsHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *crs_version(void);

/*
 Message describing the most recent failure on this thread, or null.
 Valid until the next call into the library on the same thread.
 */
const char *crs_last_error_message(void);

/*
 Parses a system specification. On success `*out_handle` receives a new handle.

 # Safety
 `spec_text` must be null or a valid NUL-terminated string; `out_handle` must be
 null or point to writable storage for a handle pointer.
 */
enum CrsStatus crs_parse(const char *spec_text, struct CrsHandle **out_handle);

/*
 Releases a handle. Null is ignored.

 # Safety
 `h` must be null or a handle from [`crs_parse`] not yet freed.
 */
void crs_free(struct CrsHandle *h);

/*
 Replaces the search budget; zero keeps the current value of a field.

 # Safety
 `h` must be null or a live handle.
 */
enum CrsStatus crs_set_budget(struct CrsHandle *h,
                              size_t max_steps,
                              size_t max_term_size,
                              uint32_t max_strata,
                              size_t max_depth);

/*
 Number of critical peaks of the system.

 # Safety
 `h` must be null or a live handle; `count` must be null or writable.
 */
enum CrsStatus crs_peak_count(struct CrsHandle *h, size_t *count);

/*
 Runs the full analysis and reports its verdict.

 # Safety
 `h` must be null or a live handle; `verdict` must be null or writable.
 */
enum CrsStatus crs_check(struct CrsHandle *h, enum CrsVerdict *verdict);

/*
 The analysis report as a JSON object. Free it with [`crs_string_free`].

 # Safety
 `h` must be null or a live handle; `json` must be null or writable.
 */
enum CrsStatus crs_report_json(struct CrsHandle *h, char **json);

/*
 Decides joinability of two ground or instantiable terms at `depth`
 (`n`, `w`, `w+n` or `w+w`; null means `w+w`).

 # Safety
 `h` must be null or a live handle; string arguments must be null or valid
 NUL-terminated strings; `answer` must be null or writable.
 */
enum CrsStatus crs_joinable(struct CrsHandle *h,
                            const char *t0,
                            const char *t1,
                            const char *depth,
                            enum CrsAnswer *answer);

/*
 Releases a string returned by the library. Null is ignored.

 # Safety
 `s` must be null or a string from this library not yet freed.
 */
void crs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRS_H */

#ifndef EWCHECK_H
#define EWCHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EwStatus {
  EW_STATUS_OK = 0,
  EW_STATUS_NULL_POINTER = 1,
  EW_STATUS_INVALID_UTF8 = 2,
  EW_STATUS_INVALID_ARGUMENT = 3,
  // Expression failed to parse or violates the index rules.
  EW_STATUS_EXPRESSION = 4,
  EW_STATUS_COMPUTATION = 5,
  EW_STATUS_BUFFER_TOO_SMALL = 6,
  EW_STATUS_PANIC = 7,
} EwStatus;

// A checked expression with its symbol table.
typedef struct EwExpression EwExpression;

// Result of a verify or relations run.
typedef struct EwReport EwReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread.
const char *ew_last_error(void);

// Runs a check suite (`all`, `geometry`, `qed`, `ew` or a family name) with
// statistics `bosonic`, `fermionic` or `both`.
//
// # Safety
// `suite` and `statistics` must be null or NUL-terminated strings; `out`
// must be null or writable.
enum EwStatus ew_verify(const char *suite,
                        const char *statistics,
                        uint32_t samples,
                        uint64_t seed,
                        struct EwReport **out);

// Nullspace search over one family.
//
// # Safety
// As for [`ew_verify`].
enum EwStatus ew_relations(const char *family,
                           const char *statistics,
                           uint32_t samples,
                           uint64_t seed,
                           struct EwReport **out);

// # Safety
// `report` must be a live handle from [`ew_verify`] or [`ew_relations`].
enum EwStatus ew_report_passed(const struct EwReport *report, bool *passed);

// Number of checks and the largest relative residual among them.
//
// # Safety
// `report` must be a live handle; the output pointers must be writable.
enum EwStatus ew_report_summary(const struct EwReport *report,
                                uintptr_t *checks,
                                double *max_residual);

// Nullspace dimension of relation block `index`.
//
// # Safety
// `report` must be a live handle; `dim` must be writable.
enum EwStatus ew_report_nullspace_dim(const struct EwReport *report,
                                      uintptr_t index,
                                      uintptr_t *dim);

// The JSON report. Free the string with [`ew_string_free`].
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum EwStatus ew_report_json(const struct EwReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void ew_report_free(struct EwReport *report);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void ew_string_free(char *s);

// Parses and checks one expression. `bind_json` may be null for the
// standard field table; otherwise it is a bind file as accepted by the
// command line tool.
//
// # Safety
// `source` must be a NUL-terminated string, `bind_json` null or one;
// `out` must be writable.
enum EwStatus ew_expression_parse(const char *source,
                                  const char *bind_json,
                                  struct EwExpression **out);

// Number of components of the value (1 for a scalar).
//
// # Safety
// `expr` must be a live handle; `len` must be writable.
enum EwStatus ew_expression_len(const struct EwExpression *expr, uintptr_t *len);

// Evaluates with symbols sampled from `seed` and writes the Grassmann body
// of each component as interleaved `re, im` pairs (row-major). `cap` is the
// number of doubles available at `values`.
//
// # Safety
// `expr` must be a live handle; `values` must point to `cap` writable doubles.
enum EwStatus ew_expression_eval(const struct EwExpression *expr,
                                 uint64_t seed,
                                 double *values,
                                 uintptr_t cap);

// Full value, Grassmann monomials included, as JSON. Free with
// [`ew_string_free`].
//
// # Safety
// `expr` must be a live handle; `out` must be writable.
enum EwStatus ew_expression_eval_json(const struct EwExpression *expr, uint64_t seed, char **out);

// # Safety
// `expr` must be null or a handle not yet freed.
void ew_expression_free(struct EwExpression *expr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EWCHECK_H */

#ifndef FROBG_H
#define FROBG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FrobgStatus {
  FROBG_STATUS_OK = 0,
  FROBG_STATUS_NULL_POINTER = 1,
  FROBG_STATUS_INVALID_UTF8 = 2,
  FROBG_STATUS_UNKNOWN_MODEL = 3,
  FROBG_STATUS_BAD_PARAMETER = 4,
  FROBG_STATUS_UNKNOWN_CHECK = 5,
  FROBG_STATUS_MODEL_FILE = 6,
  FROBG_STATUS_INVALID_MODEL = 7,
  FROBG_STATUS_INTERNAL = 8,
  FROBG_STATUS_PANIC = 9,
} FrobgStatus;

/**
 * Validated model.
 */
typedef struct FrobgModel FrobgModel;

/**
 * Finished verification report.
 */
typedef struct FrobgReport FrobgReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *frobg_last_error(void);

/**
 * Looks up a catalog model. `params` is NULL or a list like `"r=2"` or
 * `"h=5"`, comma separated.
 *
 * # Safety
 * `name` and `params` must be NULL or valid nul-terminated strings; `out`
 * must be NULL or valid for writes.
 */
enum FrobgStatus frobg_model_new(const char *name, const char *params, struct FrobgModel **out);

/**
 * Loads and validates a model definition file.
 *
 * # Safety
 * `path` must be NULL or a valid nul-terminated string; `out` must be NULL
 * or valid for writes.
 */
enum FrobgStatus frobg_model_from_file(const char *path, struct FrobgModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from this library not yet freed.
 */
void frobg_model_free(struct FrobgModel *model);

/**
 * Dimension of the model, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t frobg_model_dimension(const struct FrobgModel *model);

/**
 * Scaling anomaly as a `"p/q"` string; free with [`frobg_string_free`].
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
char *frobg_model_gamma(const struct FrobgModel *model);

/**
 * Runs checks on a model. `checks` is NULL for all, or comma separated
 * names among wdvv, getzler, bo7, bo8, bo9, gamma, caustic-residues.
 * `precision_digits` of 0 selects the default.
 *
 * # Safety
 * `model` must be a live handle, `checks` NULL or a valid string, `out`
 * valid for writes.
 */
enum FrobgStatus frobg_verify(const struct FrobgModel *model,
                              const char *checks,
                              size_t points,
                              uint64_t seed,
                              double tol,
                              uint32_t precision_digits,
                              struct FrobgReport **out);

/**
 * True when no check failed.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
bool frobg_report_passed(const struct FrobgReport *report);

/**
 * JSON rendering; free with [`frobg_string_free`].
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
char *frobg_report_json(const struct FrobgReport *report);

/**
 * # Safety
 * `report` must be NULL or a handle from this library not yet freed.
 */
void frobg_report_free(struct FrobgReport *report);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void frobg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FROBG_H */

#ifndef POLLING_H
#define POLLING_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PollingStatus {
  POLLING_STATUS_OK = 0,
  POLLING_STATUS_NULL_POINTER = 1,
  POLLING_STATUS_INVALID_UTF8 = 2,
  POLLING_STATUS_PARSE = 3,
  POLLING_STATUS_VALIDATION = 4,
  POLLING_STATUS_INVALID_ARGUMENT = 5,
  POLLING_STATUS_IO = 6,
  POLLING_STATUS_NUMERICAL = 7,
  POLLING_STATUS_UNSUPPORTED = 8,
  POLLING_STATUS_PANIC = 9,
} PollingStatus;

typedef enum PollingS0Kind {
  // `s0 = 0`: the system is transient.
  POLLING_S0_KIND_AT_ZERO = 0,
  // `s0` lies in `[lo, hi]`.
  POLLING_S0_KIND_BRACKET = 1,
  // `s0 >= lo`.
  POLLING_S0_KIND_LOWER_BOUND = 2,
} PollingS0Kind;

typedef enum PollingVerdict {
  POLLING_VERDICT_TRANSIENT = 0,
  POLLING_VERDICT_NULL_RECURRENT = 1,
  POLLING_VERDICT_POSITIVE_RECURRENT = 2,
  // Recurrent, with the first moment of the emptying time unresolved.
  POLLING_VERDICT_RECURRENT = 3,
  POLLING_VERDICT_UNDECIDED = 4,
} PollingVerdict;

// Opaque validated system description.
typedef struct PollingSpecHandle PollingSpecHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses plan text (the same format the `polling` CLI reads) and keeps its
// system and seed. The action section is parsed but not used.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum PollingStatus polling_spec_from_plan_text(const char *text, struct PollingSpecHandle **out);

// As [`polling_spec_from_plan_text`], reading the plan from a file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum PollingStatus polling_spec_from_plan_file(const char *path, struct PollingSpecHandle **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `h` must come from one of the constructors and not have been freed.
void polling_spec_free(struct PollingSpecHandle *h);

// Number of stations, `d + 1`. Returns 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
uintptr_t polling_spec_stations(const struct PollingSpecHandle *h);

// Seed from the plan's `seed` section.
//
// # Safety
// `h` must be null or a live handle.
uint64_t polling_spec_seed(const struct PollingSpecHandle *h);

// Top Lyapunov exponent of the cycle-matrix products, per cycle.
//
// # Safety
// `h` must be a live handle; `lambda` and `std_err` valid pointers.
enum PollingStatus polling_top_exponent(const struct PollingSpecHandle *h,
                                        uintptr_t n,
                                        uintptr_t replicas,
                                        uint64_t seed,
                                        double *lambda,
                                        double *std_err);

// Moment growth rate `k(s)` from `replicas` products of `n` cycles.
//
// # Safety
// `h` must be a live handle; `k` and `std_err` valid pointers.
enum PollingStatus polling_estimate_k(const struct PollingSpecHandle *h,
                                      double s,
                                      uintptr_t n,
                                      uintptr_t replicas,
                                      uint64_t seed,
                                      double *k,
                                      double *std_err);

// Searches for `s0` on `[0, s_max]` with default settings. For
// [`PollingS0Kind::LowerBound`] only `lo` is meaningful; for
// [`PollingS0Kind::AtZero`] both are 0.
//
// # Safety
// `h` must be a live handle; the output pointers valid.
enum PollingStatus polling_estimate_s0(const struct PollingSpecHandle *h,
                                       double s_max,
                                       uint64_t seed,
                                       enum PollingS0Kind *kind,
                                       double *lo,
                                       double *hi);

// Full classification with default parameters.
//
// # Safety
// `h` must be a live handle and `verdict` a valid pointer.
enum PollingStatus polling_classify(const struct PollingSpecHandle *h,
                                    uint64_t seed,
                                    enum PollingVerdict *verdict);

// Fluid emptying time from the `d` levels `x[0..len]` (relative to the station
// visited at `epoch`). Sets `*diverged` to 1 and `*time` to infinity when
// the fluid run grows without bound.
//
// # Safety
// `h` must be a live handle, `x` must point to `len` doubles, and `time`
// and `diverged` must be valid pointers.
enum PollingStatus polling_fluid_empty_time(const struct PollingSpecHandle *h,
                                            const double *x,
                                            uintptr_t len,
                                            uintptr_t epoch,
                                            uint64_t seed,
                                            double *time,
                                            int32_t *diverged);

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call on the same thread.
const char *polling_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *polling_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLLING_H */

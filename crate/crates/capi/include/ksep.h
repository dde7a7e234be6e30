/* C interface for the k-separability detection toolkit. */

#ifndef KSEP_H
#define KSEP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of any API call.
typedef enum KsepStatus {
  // The call succeeded.
  KSEP_STATUS_OK = 0,
  // A pointer was null or an argument was structurally unusable.
  KSEP_STATUS_INVALID_ARGUMENT = 1,
  // The input was parsed but violated a documented invariant.
  KSEP_STATUS_VALIDATION_FAILED = 2,
  // An unexpected internal failure; treat the handle set as poisoned.
  KSEP_STATUS_INTERNAL_ERROR = 3,
} KsepStatus;

// An immutable probe: one (base, flipped) vector pair per site.
typedef struct KsepProbe KsepProbe;

// An immutable n-partite density operator.
typedef struct KsepState KsepState;

// One evaluation of the level-k separability inequality.
typedef struct KsepReport {
  size_t k;
  double lhs;
  double rhs_pair;
  double rhs_diag;
  double margin;
  // True when the margin exceeds the detection threshold, certifying
  // that the state is not k-separable.
  bool detected;
} KsepReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread. Never null.
const char *ksep_last_error(void);

// Parse a state from the JSON file format (dims plus a dense matrix or a
// pure-state ensemble). On success `*out` owns the new handle.
//
// # Safety
// `json` must be NUL-terminated; `out` must be a valid pointer.
enum KsepStatus ksep_state_from_json(const char *json, struct KsepState **out);

// Build a state from a named family: "gw" (p1=alpha, p2=beta), "w-noise"
// (p1=beta, p2 ignored), or "w-antiw" (p1=a, p2=b).
//
// # Safety
// `family` must be NUL-terminated; `out` must be a valid pointer.
enum KsepStatus ksep_state_family(const char *family,
                                  size_t n,
                                  double p1,
                                  double p2,
                                  struct KsepState **out);

// Build a stock probe ("computational", "45", or "phase-flip") matched to
// the state's dimensions.
//
// # Safety
// `state` must be a live handle; `name` NUL-terminated; `out` valid.
enum KsepStatus ksep_probe_named(const struct KsepState *state,
                                 const char *name,
                                 struct KsepProbe **out);

// Build the seeded Haar-random probe for the state's dimensions.
//
// # Safety
// `state` must be a live handle; `out` valid.
enum KsepStatus ksep_probe_random(const struct KsepState *state,
                                  uint64_t seed,
                                  struct KsepProbe **out);

// Evaluate the level-k inequality. `eps` is the detection threshold on
// the margin; pass 1e-9 for the library default.
//
// # Safety
// `state` and `probe` must be live handles; `out` must be valid.
enum KsepStatus ksep_evaluate(const struct KsepState *state,
                              const struct KsepProbe *probe,
                              size_t k,
                              double eps,
                              struct KsepReport *out);

// Smallest k in 2..=n detected by the stock probe catalog, or 0 when
// nothing is detected.
//
// # Safety
// `state` must be a live handle; `out` must be valid.
enum KsepStatus ksep_classify_min_k(const struct KsepState *state, double eps, size_t *out);

// The exact noise threshold beta* = n(2n-k-1)/(2^n(k-1)+n(2n-k-1)) above
// which the W-plus-noise family is detectably k-nonseparable.
//
// # Safety
// `out` must be a valid pointer.
enum KsepStatus ksep_w_noise_threshold(size_t n, size_t k, double *out);

// Number of local measurement settings the plan needs for n sites:
// 5(n^2-n)/2 + n + 1.
size_t ksep_plan_settings_count(size_t n);

// Release a state handle. Null is a safe no-op.
//
// # Safety
// `state` must be null or a handle from this library, not yet freed.
void ksep_state_free(struct KsepState *state);

// Release a probe handle. Null is a safe no-op.
//
// # Safety
// `probe` must be null or a handle from this library, not yet freed.
void ksep_probe_free(struct KsepProbe *probe);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* KSEP_H */

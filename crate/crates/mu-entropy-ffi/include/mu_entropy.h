/* C interface for the mu-entropy library. */

#ifndef MU_ENTROPY_H
#define MU_ENTROPY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define MUENT_OK 0

// A required pointer argument was null.
#define MUENT_ERR_NULL 1

// Configuration problem: invalid JSON, bad measure/operator/partition data.
#define MUENT_ERR_CONFIG 2

// Enumeration budget exceeded.
#define MUENT_ERR_BUDGET 3

// Numerical failure or a matrix outside the semibistochastic class.
#define MUENT_ERR_NUMERICAL 4

// A callee panicked; the handle may be in an unusable state.
#define MUENT_ERR_PANIC 5

// Opaque experiment handle: a parsed configuration document.
typedef struct MuentExperiment MuentExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread; never free it.
const char *muent_last_error(void);

// Parse a JSON experiment document into a handle.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` must be a valid
// pointer. On success `*out` owns the handle.
int32_t muent_experiment_parse(const char *json, struct MuentExperiment **out);

// Release a handle obtained from [`muent_experiment_parse`]. Null is a no-op.
//
// # Safety
// `handle` must be null or a pointer previously returned by
// [`muent_experiment_parse`] that has not been freed.
void muent_experiment_free(struct MuentExperiment *handle);

// μ-norm ‖U_J‖²_μ of the truncated operator.
//
// # Safety
// `handle` must be a live handle; `out` must be a valid pointer.
int32_t muent_mu_norm_sq(const struct MuentExperiment *handle, double *out);

// Exact finite-dimensional entropy 𝔥(U_J) in nats via the closed form.
//
// # Safety
// `handle` must be a live handle; `out` must be a valid pointer.
int32_t muent_exact_entropy(const struct MuentExperiment *handle, double *out);

// Partition entropy 𝔥(U,χ,n) in nats; `n` overrides `params.n` when
// positive.
//
// # Safety
// `handle` must be a live handle; `out` must be a valid pointer.
int32_t muent_partition_entropy(const struct MuentExperiment *handle, uint32_t n, double *out);

// Final value of the truncation entropy series 𝔥(U_J), J = 1..=Jmax, in
// nats; `*divergent` (optional) reports the growth flag as 0/1.
//
// # Safety
// `handle` must be a live handle; `out` must be a valid pointer;
// `divergent` must be null or a valid pointer.
int32_t muent_truncation_entropy(const struct MuentExperiment *handle,
                                 double *out,
                                 int32_t *divergent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MU_ENTROPY_H */

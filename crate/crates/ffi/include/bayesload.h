#ifndef BAYESLOAD_H
#define BAYESLOAD_H

/* Generated by cbindgen from the bayesload-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Number of columns per record in [`blz_fit_im`] input.
 */
#define BLZ_IM_RECORD_LEN 12

/*
 Result of every fallible call in this interface.
 */
typedef enum BlzStatus {
  /*
   The call succeeded.
   */
  BLZ_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  BLZ_STATUS_NULL_POINTER = 1,
  /*
   An argument violated a documented precondition.
   */
  BLZ_STATUS_INVALID_ARGUMENT = 2,
  /*
   The data carry no usable information for the requested fit.
   */
  BLZ_STATUS_DEGENERATE_DATA = 3,
  /*
   A numerical routine failed to converge or diverged.
   */
  BLZ_STATUS_NUMERIC_FAILURE = 4,
  /*
   An internal invariant was violated; the library state is still sound.
   */
  BLZ_STATUS_INTERNAL_PANIC = 5,
} BlzStatus;

/*
 Fitted sample chain behind the C interface.
 */
typedef struct BlzChain BlzChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *blz_version(void);

/*
 Copies the current thread's last error message into `buf` (truncated to
 `cap − 1` bytes, always NUL-terminated when `cap > 0`) and returns the
 full message length in bytes excluding the terminator.

 # Safety
 `buf` must point to `cap` writable bytes, or be null (size query).
 */
size_t blz_last_error(char *buf, size_t cap);

/*
 Gibbs-samples the ZIP posterior from `n` paired observations under the
 default priors. On success `*out` owns the new chain.

 # Safety
 `x` and `y` must point to `n` readable doubles; `out` must be a valid
 pointer to a chain-handle slot.
 */
enum BlzStatus blz_fit_zip(const double *x,
                           const double *y,
                           size_t n,
                           uint64_t seed,
                           size_t iters,
                           size_t burn_in,
                           struct BlzChain **out);

/*
 Gibbs-samples the induction-motor posterior under the default priors.

 `data` holds `n` row-major records of [`BLZ_IM_RECORD_LEN`] doubles in
 the order E′_d, E′_q, I_d, I_q, U_d, U_q, ω, y_Ed, y_Eq, y_ω, y_Id, y_Iq
 (the motor dataset CSV column order). On success `*out` owns the chain.

 # Safety
 `data` must point to `n × 12` readable doubles; `out` must be a valid
 pointer to a chain-handle slot.
 */
enum BlzStatus blz_fit_im(const double *data,
                          size_t n,
                          uint64_t seed,
                          size_t iters,
                          size_t burn_in,
                          struct BlzChain **out);

/*
 Releases a chain handle. Null is a no-op.

 # Safety
 `chain` must be a handle returned by a fit call, freed at most once.
 */
void blz_chain_free(struct BlzChain *chain);

/*
 Number of sampled parameters, or 0 for a null handle.

 # Safety
 `chain` must be null or a live handle from a fit call.
 */
size_t blz_chain_n_params(const struct BlzChain *chain);

/*
 Number of post-burn-in samples per parameter, or 0 for a null handle.

 # Safety
 `chain` must be null or a live handle from a fit call.
 */
size_t blz_chain_kept(const struct BlzChain *chain);

/*
 Name of parameter `param`, valid while the chain is alive; null if the
 handle is null or the index is out of range.

 # Safety
 `chain` must be null or a live handle from a fit call.
 */
const char *blz_chain_param_name(const struct BlzChain *chain, size_t param);

/*
 Writes the post-burn-in mean of parameter `param` to `*out`.

 # Safety
 `chain` must be null or a live handle; `out` must be writable.
 */
enum BlzStatus blz_chain_posterior_mean(const struct BlzChain *chain, size_t param, double *out);

/*
 Copies post-burn-in samples of parameter `param` into `buf` (up to `cap`
 values) and stores the copied count in `*written`. A null `buf` performs
 a size query: `*written` receives the kept sample count.

 # Safety
 `buf` must be null or point to `cap` writable doubles; `written` must be
 writable; `chain` must be null or a live handle.
 */
enum BlzStatus blz_chain_samples(const struct BlzChain *chain,
                                 size_t param,
                                 double *buf,
                                 size_t cap,
                                 size_t *written);

/*
 Computes the equal-tailed credible interval of parameter `param` at the
 given level and writes the bounds to `*lo` and `*hi`.

 # Safety
 `chain` must be null or a live handle; `lo` and `hi` must be writable.
 */
enum BlzStatus blz_chain_interval(const struct BlzChain *chain,
                                  size_t param,
                                  double level,
                                  double *lo,
                                  double *hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAYESLOAD_H */

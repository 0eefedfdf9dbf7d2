#ifndef CHIRPSYNC_H
#define CHIRPSYNC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_INVALID_PARAMETER = 1,
  CS_STATUS_ALIASING = 2,
  CS_STATUS_SAMPLE_RATE_MISMATCH = 3,
  CS_STATUS_OUTSIDE_SUPPORT = 4,
  CS_STATUS_ZERO_CHIRP_RATE = 5,
  CS_STATUS_EMPTY_WINDOW = 6,
  CS_STATUS_CONTOUR_EXITS_GRID = 7,
  CS_STATUS_INFEASIBLE = 8,
  CS_STATUS_NOT_DETECTED = 9,
  CS_STATUS_MODE_MISMATCH = 10,
  CS_STATUS_IO = 11,
  CS_STATUS_FORMAT = 12,
  CS_STATUS_NULL_POINTER = 13,
  CS_STATUS_BUFFER_TOO_SMALL = 14,
  CS_STATUS_PANIC = 15,
} CsStatus;

// Opaque sampled signal.
typedef struct CsSignal CsSignal;

typedef struct CsMaskReport {
  bool pass;
  double worst_margin_db;
  double worst_freq_hz;
} CsMaskReport;

// Binding constraint: 1, 2 or 3 for S1, S2, S3.
typedef struct CsOptimum {
  double alpha_hat;
  double beta_hat;
  int32_t binding_constraint;
  double occupied_bandwidth;
  double mask_margin_db;
} CsOptimum;

typedef struct CsSyncResult {
  double t1;
  double t2;
  double d_hat;
  double joint_metric;
  double delta_f_hat;
  double corrected_timing;
  double timing_discrepancy;
} CsSyncResult;

typedef struct CsLinkBudget {
  double received_power_dbm;
  double noise_power_dbm;
  double snr_db;
} CsLinkBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *cs_last_error_message(void);

// Samples ⟨alpha, beta, duration⟩ at `sample_rate`.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum CsStatus cs_chirp_prototype(double alpha,
                                 double beta,
                                 double duration,
                                 double sample_rate,
                                 struct CsSignal **out);

// Up-chirp ⟨alpha, beta, half_duration⟩ followed by its conjugate pair.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum CsStatus cs_chirp_composite(double alpha,
                                 double beta,
                                 double half_duration,
                                 double sample_rate,
                                 struct CsSignal **out);

// Builds a signal from `n` interleaved (re, im) pairs.
//
// # Safety
// `interleaved` must point to `2 * n` readable doubles; `out` must be valid.
enum CsStatus cs_signal_from_samples(const double *interleaved,
                                     uintptr_t n,
                                     double sample_rate,
                                     double t0,
                                     struct CsSignal **out);

// Reads an IQ file and its `.json` sidecar.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid.
enum CsStatus cs_signal_read_iq(const char *path, struct CsSignal **out);

// Writes an IQ file and its `.json` sidecar.
//
// # Safety
// `signal` must be a live handle and `path` a NUL-terminated string.
enum CsStatus cs_signal_write_iq(const struct CsSignal *signal, const char *path);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `signal` must be null or a live handle.
uintptr_t cs_signal_len(const struct CsSignal *signal);

// # Safety
// `signal` must be null or a live handle.
double cs_signal_sample_rate(const struct CsSignal *signal);

// # Safety
// `signal` must be null or a live handle.
double cs_signal_t0(const struct CsSignal *signal);

// Copies the samples as interleaved (re, im) into `buf`, which holds
// `capacity` complex values.
//
// # Safety
// `signal` must be a live handle; `buf` must point to `2 * capacity` writable doubles.
enum CsStatus cs_signal_copy_samples(const struct CsSignal *signal,
                                     double *buf,
                                     uintptr_t capacity);

// Releases a handle. Null is ignored.
//
// # Safety
// `signal` must be null or a handle not yet freed.
void cs_signal_free(struct CsSignal *signal);

// Smallest symmetric band holding 1 − sigma of the energy, Hz.
//
// # Safety
// `out` must be valid.
enum CsStatus cs_occupied_bandwidth(double alpha,
                                    double beta,
                                    double duration,
                                    double sigma,
                                    double sample_rate,
                                    double *out);

// Checks the waveform against the bundled narrowband mask.
//
// # Safety
// `out` must be valid.
enum CsStatus cs_mask_check_nbiot(double alpha,
                                  double beta,
                                  double duration,
                                  double sample_rate,
                                  struct CsMaskReport *out);

// Optimal |α| under the bundled profile at waveform length `duration`.
// A non-positive `delta_f_max` keeps the profile's value.
//
// # Safety
// `out` must be valid.
enum CsStatus cs_optimize_nbiot(double duration, double delta_f_max, struct CsOptimum *out);

// Paired-peak detection and estimation. `separation <= 0` means back-to-back
// composite halves.
//
// # Safety
// `signal` must be a live handle; `out` must be valid.
enum CsStatus cs_synchronize(const struct CsSignal *signal,
                             double alpha_dot,
                             double sub_duration,
                             double delta_f_max,
                             double threshold,
                             double separation,
                             struct CsSyncResult *out);

// Passes `signal` through the default channel: delay, frequency error, AWGN
// at `snr_db` in 200 kHz (`INFINITY` disables noise), random-data background
// and the 200 kHz receive filter.
//
// # Safety
// `signal` must be a live handle; `out` must be valid.
enum CsStatus cs_awgn_channel(const struct CsSignal *signal,
                              double snr_db,
                              double delta_f,
                              double delay,
                              uint64_t seed,
                              struct CsSignal **out);

// # Safety
// `out` must be valid.
enum CsStatus cs_link_budget(double tx_power_dbm,
                             double path_loss_db,
                             double noise_figure_db,
                             double bandwidth_dbhz,
                             struct CsLinkBudget *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHIRPSYNC_H */

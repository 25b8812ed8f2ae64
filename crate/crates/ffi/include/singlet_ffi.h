#ifndef SINGLET_FFI_H
#define SINGLET_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum SingletStatus {
  SINGLET_STATUS_OK = 0,
  SINGLET_STATUS_NULL_POINTER = 1,
  SINGLET_STATUS_INVALID_ARGUMENT = 2,
  SINGLET_STATUS_NUMERICAL = 3,
  SINGLET_STATUS_PARSE = 4,
  SINGLET_STATUS_IO = 5,
  SINGLET_STATUS_BUFFER_TOO_SMALL = 6,
  SINGLET_STATUS_NOT_FOUND = 7,
  SINGLET_STATUS_PANIC = 8,
} SingletStatus;

/*
 Echo spacing convention for M2S: 1/(4·sqrt(J²+Δν²)) or 1/(4J).
 */
typedef enum SingletTauConvention {
  SINGLET_TAU_CONVENTION_EFFECTIVE = 0,
  SINGLET_TAU_CONVENTION_J_ONLY = 1,
} SingletTauConvention;

/*
 Scan kinds for curves.
 */
typedef enum SingletScanType {
  SINGLET_SCAN_TYPE_DIP = 0,
  SINGLET_SCAN_TYPE_DURATION = 1,
  SINGLET_SCAN_TYPE_EVOLVE = 2,
  SINGLET_SCAN_TYPE_EFFICIENCY = 3,
} SingletScanType;

/*
 Fit models.
 */
typedef enum SingletFitModel {
  SINGLET_FIT_MODEL_LORENTZIAN = 0,
  SINGLET_FIT_MODEL_SIN4 = 1,
  SINGLET_FIT_MODEL_SIN4_OFFSET = 2,
  SINGLET_FIT_MODEL_EXPONENTIAL = 3,
} SingletFitModel;

/*
 A scanned signal (opaque).
 */
typedef struct SingletCurve SingletCurve;

/*
 Fitted parameters with uncertainties (opaque).
 */
typedef struct SingletFit SingletFit;

/*
 A pulse sequence (opaque).
 */
typedef struct SingletSequence SingletSequence;

/*
 A spin system (opaque).
 */
typedef struct SingletSystem SingletSystem;

/*
 Observables recorded while running a sequence (opaque).
 */
typedef struct SingletTrajectory SingletTrajectory;

/*
 Longitudinal and singlet lifetimes in seconds.
 */
typedef struct SingletRelaxation {
  double t1;
  double ts;
} SingletRelaxation;

/*
 M2S echo-train counts and timing.
 */
typedef struct SingletM2sParams {
  uint32_t n1;
  uint32_t n2;
  double tau_s;
  double nu_e_hz;
  double total_duration_s;
} SingletM2sParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL if none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *singlet_last_error_message(void);

/*
 Frees a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from a `singlet_*` function documented as returning an owned
 string, and must not be freed twice.
 */
void singlet_string_free(char *s);

/*
 Two-spin system with coupling `j_hz` and offsets ±Δν/2.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum SingletStatus singlet_system_pair(double j_hz, double delta_nu_hz, struct SingletSystem **out);

/*
 Pair (spins 0 and 1) plus a third spin at `third_offset_hz` coupled by
 `j13_hz` and `j23_hz`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum SingletStatus singlet_system_pair_with_third(double j_hz,
                                                  double delta_nu_hz,
                                                  double third_offset_hz,
                                                  double j13_hz,
                                                  double j23_hz,
                                                  struct SingletSystem **out);

/*
 Number of spins, or 0 for NULL.

 # Safety
 `system` must be NULL or a live handle.
 */
size_t singlet_system_n_spins(const struct SingletSystem *system);

/*
 # Safety
 `system` must be NULL or a handle not yet freed.
 */
void singlet_system_free(struct SingletSystem *system);

/*
 SLIC: 90° excitation, spin-lock at `nutation_hz` for `tau_sl`, storage
 for `tau_evolve`, and optionally a second lock of `tau_sl` for readout.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum SingletStatus singlet_sequence_slic(double nutation_hz,
                                         double tau_sl,
                                         double tau_evolve,
                                         bool readout,
                                         struct SingletSequence **out);

/*
 M2S with counts and spacing derived from `j_hz` and `delta_nu_hz`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum SingletStatus singlet_sequence_m2s(double j_hz,
                                        double delta_nu_hz,
                                        enum SingletTauConvention convention,
                                        double tau_evolve,
                                        bool readout,
                                        struct SingletSequence **out);

/*
 Sequence from its JSON form (`{"elements": [...], "record_points": ...}`).

 # Safety
 `json` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum SingletStatus singlet_sequence_from_json(const char *json, struct SingletSequence **out);

/*
 Total duration in seconds, or NaN for NULL.

 # Safety
 `sequence` must be NULL or a live handle.
 */
double singlet_sequence_duration(const struct SingletSequence *sequence);

/*
 # Safety
 `sequence` must be NULL or a handle not yet freed.
 */
void singlet_sequence_free(struct SingletSequence *sequence);

/*
 Runs `sequence` from thermal equilibrium with polarization `polarization`
 (0.01 if zero). `relaxation` may be NULL for ideal evolution.

 # Safety
 `system` and `sequence` must be live handles; `relaxation` NULL or valid;
 `out` a valid handle slot.
 */
enum SingletStatus singlet_simulate(const struct SingletSystem *system,
                                    const struct SingletSequence *sequence,
                                    const struct SingletRelaxation *relaxation,
                                    double polarization,
                                    struct SingletTrajectory **out);

/*
 Number of recorded samples, or 0 for NULL.

 # Safety
 `trajectory` must be NULL or a live handle.
 */
size_t singlet_trajectory_len(const struct SingletTrajectory *trajectory);

/*
 Number of observable columns.
 */
size_t singlet_trajectory_n_columns(void);

/*
 Index of the observable column named `name` (e.g. "P_S0").

 # Safety
 `name` must be a NUL-terminated string; `index` a valid pointer.
 */
enum SingletStatus singlet_trajectory_column_index(const char *name, size_t *index);

/*
 Copies the sample times into `out`.

 # Safety
 `trajectory` must be a live handle; `out` must hold `capacity` doubles.
 */
enum SingletStatus singlet_trajectory_times(const struct SingletTrajectory *trajectory,
                                            double *out,
                                            size_t capacity);

/*
 Copies observable column `column` into `out`.

 # Safety
 `trajectory` must be a live handle; `out` must hold `capacity` doubles.
 */
enum SingletStatus singlet_trajectory_column(const struct SingletTrajectory *trajectory,
                                             size_t column,
                                             double *out,
                                             size_t capacity);

/*
 # Safety
 `trajectory` must be NULL or a handle not yet freed.
 */
void singlet_trajectory_free(struct SingletTrajectory *trajectory);

/*
 M2S counts and spacing for a pair; requires J > Δν > 0.

 # Safety
 `out` must be a valid pointer.
 */
enum SingletStatus singlet_m2s_params(double j_hz,
                                      double delta_nu_hz,
                                      enum SingletTauConvention convention,
                                      struct SingletM2sParams *out);

/*
 Rate-model SLIC efficiency (singlet population over the 0.5 ceiling).

 # Safety
 `out` must be a valid pointer.
 */
enum SingletStatus singlet_slic_efficiency(double t1,
                                           double ts,
                                           double delta_nu_hz,
                                           bool optimize_duration,
                                           double *out);

/*
 Rate-model M2S efficiency at the ideal stage durations.

 # Safety
 `out` must be a valid pointer.
 */
enum SingletStatus singlet_m2s_efficiency(double t1, double ts, double delta_nu_hz, double *out);

/*
 Curve from `len` grid points and signals; `x` must be strictly increasing.

 # Safety
 `x` and `y` must each hold `len` doubles; `out` a valid handle slot.
 */
enum SingletStatus singlet_curve_new(enum SingletScanType kind,
                                     const double *x,
                                     const double *y,
                                     size_t len,
                                     struct SingletCurve **out);

/*
 Reads a curve file written by the `singlet` CLI (CSV or JSON).

 # Safety
 `path` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum SingletStatus singlet_curve_read(const char *path, struct SingletCurve **out);

/*
 Runs the scan described by a JSON run config (the `scan` section).

 # Safety
 `config_json` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum SingletStatus singlet_scan_from_config(const char *config_json, struct SingletCurve **out);

/*
 Number of points, or 0 for NULL.

 # Safety
 `curve` must be NULL or a live handle.
 */
size_t singlet_curve_len(const struct SingletCurve *curve);

/*
 Copies the grid into `out`.

 # Safety
 `curve` must be a live handle; `out` must hold `capacity` doubles.
 */
enum SingletStatus singlet_curve_x(const struct SingletCurve *curve, double *out, size_t capacity);

/*
 Copies the signal into `out`.

 # Safety
 `curve` must be a live handle; `out` must hold `capacity` doubles.
 */
enum SingletStatus singlet_curve_y(const struct SingletCurve *curve, double *out, size_t capacity);

/*
 # Safety
 `curve` must be NULL or a handle not yet freed.
 */
void singlet_curve_free(struct SingletCurve *curve);

/*
 Fits `curve` with `model`.

 # Safety
 `curve` must be a live handle; `out` a valid handle slot.
 */
enum SingletStatus singlet_fit(const struct SingletCurve *curve,
                               enum SingletFitModel model,
                               struct SingletFit **out);

/*
 Looks up a fitted parameter (e.g. "center", "period", "rate") or a
 derived quantity (e.g. "delta_nu_hz", "lifetime"). Quantities that could
 not be determined report `SINGLET_STATUS_NOT_FOUND`.

 # Safety
 `fit` must be a live handle; `name` NUL-terminated; `out` valid.
 */
enum SingletStatus singlet_fit_value(const struct SingletFit *fit, const char *name, double *out);

/*
 Standard error of a fitted parameter; `SINGLET_STATUS_NOT_FOUND` when the
 parameter is unknown or its covariance is singular.

 # Safety
 `fit` must be a live handle; `name` NUL-terminated; `out` valid.
 */
enum SingletStatus singlet_fit_std_error(const struct SingletFit *fit,
                                         const char *name,
                                         double *out);

/*
 Whether the optimizer reached a stationary point; false for NULL.

 # Safety
 `fit` must be NULL or a live handle.
 */
bool singlet_fit_converged(const struct SingletFit *fit);

/*
 The full fit result as JSON. Free with `singlet_string_free`.

 # Safety
 `fit` must be a live handle; `out` a valid pointer.
 */
enum SingletStatus singlet_fit_to_json(const struct SingletFit *fit, char **out);

/*
 # Safety
 `fit` must be NULL or a handle not yet freed.
 */
void singlet_fit_free(struct SingletFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINGLET_FFI_H */

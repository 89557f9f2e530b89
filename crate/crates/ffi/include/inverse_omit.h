#ifndef INVERSE_OMIT_H
#define INVERSE_OMIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OmitStatus {
  OMIT_STATUS_OK = 0,
  OMIT_STATUS_NULL_POINTER = 1,
  OMIT_STATUS_INVALID_PARAMETER = 2,
  OMIT_STATUS_CONVERGENCE = 3,
  OMIT_STATUS_SINGULAR_RESPONSE = 4,
  OMIT_STATUS_NO_REAL_COUPLING = 5,
  OMIT_STATUS_DEGENERATE_MODES = 6,
  OMIT_STATUS_INVALID_WINDOW = 7,
  OMIT_STATUS_NO_FEASIBLE_RATIO = 8,
  OMIT_STATUS_INVALID_STEP = 9,
  OMIT_STATUS_DIVERGENCE = 10,
  OMIT_STATUS_INDEX_OUT_OF_RANGE = 11,
  OMIT_STATUS_PANIC = 12,
} OmitStatus;

typedef enum OmitConvention {
  /*
   `delta = omega1 + D`.
   */
  OMIT_CONVENTION_EQ8 = 0,
  /*
   `delta = omega1 - D`.
   */
  OMIT_CONVENTION_EQ11 = 1,
} OmitConvention;

/*
 Opaque list of channels, sorted by detuning.
 */
typedef struct OmitChannelSet OmitChannelSet;

/*
 Opaque validated system.
 */
typedef struct OmitSystem OmitSystem;

/*
 Linearized model parameters, mirrored field by field.
 */
typedef struct OmitParams {
  double omega1;
  double omega2;
  double gamma1;
  double gamma2;
  double kappa;
  double delta_cav;
  double g_eff;
  double g_eff_phase;
  double lambda_c;
  double eps_left;
  double eps_right;
  double theta_rel;
  enum OmitConvention convention;
} OmitParams;

typedef struct OmitComplex {
  double re;
  double im;
} OmitComplex;

typedef struct OmitProbeResponse {
  double detuning;
  double delta;
  struct OmitComplex dc_plus;
  struct OmitComplex db1_plus;
  struct OmitComplex db2_plus;
} OmitProbeResponse;

typedef struct OmitOutputFields {
  struct OmitComplex out_left;
  struct OmitComplex out_right;
  double power_left;
  double power_right;
} OmitOutputFields;

typedef struct OmitEnergy {
  double norm_photon;
  double norm_phonon1;
  double norm_phonon2;
  double phonon_sum;
} OmitEnergy;

typedef struct OmitLocusPoint {
  double detuning;
  double theta;
  double modulus_residual;
  bool feasible;
  struct OmitComplex z;
} OmitLocusPoint;

typedef struct OmitChannel {
  double detuning;
  double residual_power;
  bool exact;
} OmitChannel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Static description of a status code. Never null; do not free.
 */
const char *omit_status_message(enum OmitStatus status);

/*
 Library version string. Never null; do not free.
 */
const char *omit_version(void);

/*
 Validate `params` and allocate a system handle into `*out`.

 # Safety
 `params` must point to a readable `OmitParams`, `out` to writable storage.
 */
enum OmitStatus omit_system_new(const struct OmitParams *params, struct OmitSystem **out);

/*
 Identical resonators at `omega_m` with `gamma = 2 kappa`, `Delta = omega_m`
 and unit in-phase probes.

 # Safety
 `out` must point to writable storage.
 */
enum OmitStatus omit_system_identical(double omega_m,
                                      double kappa,
                                      double g_eff,
                                      double lambda_c,
                                      struct OmitSystem **out);

/*
 # Safety
 `sys` must be null or a handle from `omit_system_new`/`omit_system_identical`
 that has not been freed.
 */
void omit_system_free(struct OmitSystem *sys);

/*
 Copy the parameters back out, with `theta_rel` reduced to (-pi, pi].

 # Safety
 `sys` must be a live handle, `out` writable.
 */
enum OmitStatus omit_system_params(const struct OmitSystem *sys, struct OmitParams *out);

/*
 # Safety
 `sys` must be a live handle, `out` writable.
 */
enum OmitStatus omit_probe_response(const struct OmitSystem *sys,
                                    double detuning,
                                    struct OmitProbeResponse *out);

/*
 Output fields with powers normalized to `eps_left^2`.

 # Safety
 `sys` must be a live handle, `out` writable.
 */
enum OmitStatus omit_output_fields(const struct OmitSystem *sys,
                                   double detuning,
                                   struct OmitOutputFields *out);

/*
 # Safety
 `sys` must be a live handle, `out` writable.
 */
enum OmitStatus omit_energy_distribution(const struct OmitSystem *sys,
                                         double detuning,
                                         struct OmitEnergy *out);

/*
 Point on the unilateral-absorption locus with the default modulus tolerance.

 # Safety
 `sys` must be a live handle, `out` writable.
 */
enum OmitStatus omit_unilateral_locus(const struct OmitSystem *sys,
                                      double detuning,
                                      struct OmitLocusPoint *out);

/*
 Mean `dD/dtheta` over `[d_lo, d_hi]`. `*feasible` may be null.

 # Safety
 `sys` must be a live handle, `slope` writable, `feasible` null or writable.
 */
enum OmitStatus omit_phase_sensitivity(const struct OmitSystem *sys,
                                       double d_lo,
                                       double d_hi,
                                       double *slope,
                                       bool *feasible);

/*
 `lambda = sqrt(|G|^2/2 - kappa^2)`.

 # Safety
 `out` must be writable.
 */
enum OmitStatus omit_matching_coulomb_coupling(double g_mag, double kappa, double *out);

/*
 Closed-form channels of the matched identical system.

 # Safety
 `out` must be writable.
 */
enum OmitStatus omit_analytic_channels(double g_mag, double kappa, struct OmitChannelSet **out);

/*
 Numeric channel search over `[d_min, d_max]` on `grid_points >= 100`
 samples; a channel is exact when its residual power is below `tol`.

 # Safety
 `sys` must be a live handle, `out` writable.
 */
enum OmitStatus omit_find_channels(const struct OmitSystem *sys,
                                   double d_min,
                                   double d_max,
                                   size_t grid_points,
                                   double tol,
                                   struct OmitChannelSet **out);

/*
 Number of channels, or 0 for a null handle.

 # Safety
 `set` must be null or a live handle.
 */
size_t omit_channel_set_len(const struct OmitChannelSet *set);

/*
 Number of channels flagged exact, or 0 for a null handle.

 # Safety
 `set` must be null or a live handle.
 */
size_t omit_channel_set_exact_count(const struct OmitChannelSet *set);

/*
 # Safety
 `set` must be a live handle, `out` writable.
 */
enum OmitStatus omit_channel_set_get(const struct OmitChannelSet *set,
                                     size_t index,
                                     struct OmitChannel *out);

/*
 # Safety
 `set` must be null or a live handle not yet freed.
 */
void omit_channel_set_free(struct OmitChannelSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INVERSE_OMIT_H */

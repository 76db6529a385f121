#ifndef PHOTON_ENGINE_H
#define PHOTON_ENGINE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// All atoms share the pump phase.
#define PE_PHASE_COHERENT 0

// Pump phase is random from atom to atom.
#define PE_PHASE_RANDOMIZED 1

typedef enum PeStatus {
  PE_STATUS_OK = 0,
  PE_STATUS_NULL_POINTER = 1,
  PE_STATUS_INVALID_ARGUMENT = 2,
  // Gain exceeds cavity loss; no steady state exists.
  PE_STATUS_MASING = 3,
  PE_STATUS_SOLVER = 4,
  PE_STATUS_PANIC = 5,
} PeStatus;

// Cavity field density matrix.
typedef struct PeFieldState PeFieldState;

// Cavity and beam parameters.
typedef struct PeParams PeParams;

// Closed-form reservoir quantities for one operating point.
typedef struct PeReservoir {
  double rho_ee;
  double rho_gg;
  double rho_eg_re;
  double rho_eg_im;
  // Injection rate, 1/s.
  double gamma_inj;
  double n_th;
  // Net damping rate, rad/s.
  double gamma_r;
  double lambda_re;
  double lambda_im;
  // Reservoir temperature, K.
  double t_r;
} PeReservoir;

// Quasi-static cycle ledger. Stroke arrays follow A→B, B→C, C→D, D→A.
typedef struct PeCycleLedger {
  double n_th;
  double n_sr;
  double w_out;
  double q_in;
  double q_out;
  double eta;
  double t_c_sr;
  double t_c_th;
  double t_r;
  double work[4];
  double heat[4];
  double entropy_change[4];
  double ergotropy_change[4];
} PeCycleLedger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pe_version(void);

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *pe_last_error_message(void);

// Experimental cavity: (g, κ, γ)/2π = (334, 74, 25) kHz, gτ = 0.17, N̄ = 0.8.
struct PeParams *pe_params_experimental(void);

// Experimental cavity rescaled to the given `gτ` and `κτ`; null on invalid input.
struct PeParams *pe_params_with_products(double g_tau, double kappa_tau, double n_bar);

// # Safety
// `params` must be null or a live handle.
enum PeStatus pe_params_set_n_bar(struct PeParams *params, double n_bar);

// Sets the atom-cavity detuning, rad/s.
//
// # Safety
// `params` must be null or a live handle.
enum PeStatus pe_params_set_delta_ac(struct PeParams *params, double delta_ac);

// # Safety
// `params` must be null or a handle not yet freed.
void pe_params_free(struct PeParams *params);

// Bloch angle giving reservoir temperature `t_r` (K) at the current detuning.
//
// # Safety
// `params` must be a live handle and `theta_out` writable.
enum PeStatus pe_calibrate_theta(const struct PeParams *params, double t_r, double *theta_out);

// # Safety
// `params` must be a live handle and `out` writable.
enum PeStatus pe_reservoir_derive(const struct PeParams *params,
                                  double theta,
                                  uint32_t phase_mode,
                                  struct PeReservoir *out);

// Numerical steady state at Fock truncation `dim`; the handle is written to `out`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PeStatus pe_steady_state(const struct PeParams *params,
                              double theta,
                              uint32_t phase_mode,
                              size_t dim,
                              struct PeFieldState **out);

// Fock dimension, 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t pe_state_dim(const struct PeFieldState *state);

// Writes `⟨a†a⟩` and `g²(0)`.
//
// # Safety
// `state` must be a live handle; outputs must be writable.
enum PeStatus pe_state_stats(const struct PeFieldState *state, double *n_mean, double *g2_zero);

// Von Neumann entropy in units of k_B; NaN for a null handle.
//
// # Safety
// `state` must be null or a live handle.
double pe_state_entropy(const struct PeFieldState *state);

// Ergotropy for mode energy `hbar_omega` (J).
//
// # Safety
// `state` must be a live handle and `out` writable.
enum PeStatus pe_state_ergotropy(const struct PeFieldState *state, double hbar_omega, double *out);

// Copies `min(len, dim)` Fock populations into `buf`.
//
// # Safety
// `state` must be a live handle and `buf` valid for `len` writes.
enum PeStatus pe_state_populations(const struct PeFieldState *state, double *buf, size_t len);

// # Safety
// `state` must be null or a handle not yet freed.
void pe_state_free(struct PeFieldState *state);

// Quasi-static cycle between detunings `delta_1_hz` and `delta_2_hz` (Hz).
// `thermal_only` nonzero dephases the atoms on every stroke.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PeStatus pe_cycle_run(const struct PeParams *params,
                           double theta,
                           double delta_1_hz,
                           double delta_2_hz,
                           int32_t thermal_only,
                           struct PeCycleLedger *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTON_ENGINE_H */

#ifndef MODCOOL_H
#define MODCOOL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum ModcoolStatus {
  MODCOOL_STATUS_OK = 0,
  /*
   Invalid argument or configuration.
   */
  MODCOOL_STATUS_CONFIG = 2,
  /*
   Truncation, fit or other numerical failure.
   */
  MODCOOL_STATUS_NUMERICAL = 3,
  MODCOOL_STATUS_IO = 4,
  /*
   A required pointer was null.
   */
  MODCOOL_STATUS_NULL_POINTER = 5,
  /*
   A Rust panic was caught at the boundary.
   */
  MODCOOL_STATUS_PANIC = 6,
} ModcoolStatus;

/*
 Opaque oscillator density matrix.
 */
typedef struct ModcoolState ModcoolState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last error on this thread; empty if none. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *modcool_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *modcool_version(void);

/*
 Thermal state with mean occupation `nbar` truncated at `dim` levels.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum ModcoolStatus modcool_state_thermal(double nbar, size_t dim, struct ModcoolState **out);

/*
 Releases a state handle. Null is ignored.

 # Safety
 `state` must be null or a handle returned by this library, not yet freed.
 */
void modcool_state_free(struct ModcoolState *state);

/*
 Number of Fock levels of `state`, or 0 for a null handle.

 # Safety
 `state` must be null or a live handle.
 */
size_t modcool_state_dim(const struct ModcoolState *state);

/*
 `⟨n̂⟩` of `state`.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum ModcoolStatus modcool_state_mean_occupation(const struct ModcoolState *state, double *out);

/*
 Copies the Fock populations into `buf`, which must hold `len >= dim` values.

 # Safety
 `state` must be a live handle and `buf` writable for `len` doubles.
 */
enum ModcoolStatus modcool_state_populations(const struct ModcoolState *state,
                                             double *buf,
                                             size_t len);

/*
 Applies one cooling round (position then momentum contraction) and
 returns the result as a new handle; the input is left untouched.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum ModcoolStatus modcool_apply_round(const struct ModcoolState *state,
                                       double epsilon_q,
                                       double alpha_q,
                                       double epsilon_p,
                                       double alpha_p,
                                       struct ModcoolState **out);

/*
 Quantum-optimal `(ε, α)` for a thermal state and the resulting energy ratio.

 # Safety
 The output pointers must be writable.
 */
enum ModcoolStatus modcool_optimize_epsilon(double nbar,
                                            double *epsilon,
                                            double *alpha,
                                            double *energy_ratio);

/*
 Mean energy in ħω after one round on a thermal state: the classical
 formula if `quantum` is 0, the exact quantum one otherwise.

 # Safety
 `out` must be writable.
 */
enum ModcoolStatus modcool_round_energy(double nbar,
                                        double epsilon,
                                        double alpha,
                                        int32_t quantum,
                                        double *out);

/*
 Doppler-optimal detuning and minimum occupation for linewidth `gamma`
 and trap frequency `omega` (both rad/s).

 # Safety
 The output pointers must be writable.
 */
enum ModcoolStatus modcool_doppler_limit(double gamma,
                                         double omega,
                                         double *detuning,
                                         double *nbar_min);

/*
 Runs the experiment described by the TOML file at `config_path`, writing
 results into `out_dir` (or the config's own directory if null).

 # Safety
 `config_path` must be a NUL-terminated string; `out_dir` null or one.
 */
enum ModcoolStatus modcool_run_config(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODCOOL_H */

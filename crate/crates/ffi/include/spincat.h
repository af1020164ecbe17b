#ifndef SPINCAT_H
#define SPINCAT_H

#include <stddef.h>
#include <stdint.h>

typedef enum SpincatStatus {
  SPINCAT_STATUS_OK = 0,
  SPINCAT_STATUS_NULL_POINTER = 1,
  SPINCAT_STATUS_INVALID_ARGUMENT = 2,
  SPINCAT_STATUS_NUMERICAL = 3,
  SPINCAT_STATUS_BUFFER_TOO_SMALL = 4,
  SPINCAT_STATUS_IO = 5,
  SPINCAT_STATUS_PANIC = 6,
} SpincatStatus;

typedef enum SpincatFormat {
  SPINCAT_FORMAT_CSV = 0,
  SPINCAT_FORMAT_JSON = 1,
} SpincatFormat;

typedef enum SpincatCommand {
  SPINCAT_COMMAND_EVOLVE = 0,
  SPINCAT_COMMAND_PARITY = 1,
  SPINCAT_COMMAND_RAMSEY = 2,
  SPINCAT_COMMAND_HELLINGER = 3,
  SPINCAT_COMMAND_TOMO = 4,
  SPINCAT_COMMAND_BUDGET = 5,
} SpincatCommand;

// Run configuration for the reproduction commands.
typedef struct SpincatConfig SpincatConfig;

// Density matrix of one spin.
typedef struct SpincatState SpincatState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *spincat_version(void);

// Length in bytes of the last error message on this thread, NUL excluded; 0 if none.
size_t spincat_last_error_length(void);

// Copies the last error message (NUL-terminated) into `buf`.
//
// # Safety
// `buf` must be valid for `len` bytes.
enum SpincatStatus spincat_last_error_message(char *buf, size_t len);

// Ideal kitten state (|-J> + i|J>)/√2 for spin `two_j`/2.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum SpincatStatus spincat_state_kitten(uint32_t two_j, struct SpincatState **out);

// |-J> evolved under the twisting Hamiltonian for a dimensionless time ωt.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum SpincatStatus spincat_state_twisted(uint32_t two_j, double omega_t, struct SpincatState **out);

// Identity / (2J+1).
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum SpincatStatus spincat_state_maximally_mixed(uint32_t two_j, struct SpincatState **out);

// State from a row-major (2J+1)² density matrix given as real and imaginary parts.
//
// # Safety
// `re` and `im` must be valid for `len` doubles; `out` must be a valid handle slot.
enum SpincatStatus spincat_state_from_density(uint32_t two_j,
                                              const double *re,
                                              const double *im,
                                              size_t len,
                                              struct SpincatState **out);

// Releases a state handle; null is ignored.
//
// # Safety
// `state` must come from a `spincat_state_*` constructor and not be used afterwards.
void spincat_state_free(struct SpincatState *state);

// Hilbert-space dimension 2J+1.
//
// # Safety
// `state` and `out` must be valid.
enum SpincatStatus spincat_state_dim(const struct SpincatState *state, size_t *out);

// Copies the density matrix, row-major, into `re` and `im` (each at least dim² doubles).
//
// # Safety
// `re` and `im` must be valid for `len` doubles.
enum SpincatStatus spincat_state_density(const struct SpincatState *state,
                                         double *re,
                                         double *im,
                                         size_t len);

// Π_m along z, m = -J..J.
//
// # Safety
// `out` must be valid for `len` doubles.
enum SpincatStatus spincat_state_z_probabilities(const struct SpincatState *state,
                                                 double *out,
                                                 size_t len);

// Π_m along the equatorial axis at azimuth `phi`.
//
// # Safety
// `out` must be valid for `len` doubles.
enum SpincatStatus spincat_state_equatorial_probabilities(const struct SpincatState *state,
                                                          double phi,
                                                          double *out,
                                                          size_t len);

// Parity Σ(-1)^(J-m) Π_m along the equatorial axis at azimuth `phi`.
//
// # Safety
// `state` and `out` must be valid.
enum SpincatStatus spincat_state_parity(const struct SpincatState *state, double phi, double *out);

// Overlap ⟨kitten|ρ|kitten⟩.
//
// # Safety
// `state` and `out` must be valid.
enum SpincatStatus spincat_state_kitten_fidelity(const struct SpincatState *state, double *out);

// 2|ρ_{-J,J}| / (ρ_{-J,-J} + ρ_{J,J}).
//
// # Safety
// `state` and `out` must be valid.
enum SpincatStatus spincat_state_coherence_ratio(const struct SpincatState *state, double *out);

// Wigner function on an `n_theta` × `n_phi` grid, row-major in θ.
//
// # Safety
// `out` must be valid for `len` doubles.
enum SpincatStatus spincat_state_wigner(const struct SpincatState *state,
                                        size_t n_theta,
                                        size_t n_phi,
                                        double *out,
                                        size_t len);

// Metrological gain (2J)·C² of a parity fringe with contrast C.
//
// # Safety
// `out` must be valid.
enum SpincatStatus spincat_parity_gain(uint32_t two_j, double contrast, double *out);

// Built-in default configuration.
//
// # Safety
// `out` must be a valid handle slot.
enum SpincatStatus spincat_config_default(struct SpincatConfig **out);

// Configuration read from a JSON file and validated.
//
// # Safety
// `path` must be a NUL-terminated string; `out` a valid handle slot.
enum SpincatStatus spincat_config_load(const char *path, struct SpincatConfig **out);

// # Safety
// `config` must come from a `spincat_config_*` constructor and not be used afterwards.
void spincat_config_free(struct SpincatConfig *config);

// # Safety
// `config` must be valid.
enum SpincatStatus spincat_config_set_seed(struct SpincatConfig *config, uint64_t seed);

// Atoms per measurement setting; 0 switches sampling off.
//
// # Safety
// `config` must be valid.
enum SpincatStatus spincat_config_set_samples(struct SpincatConfig *config, uint64_t atoms);

// # Safety
// `config` must be valid.
enum SpincatStatus spincat_config_set_format(struct SpincatConfig *config,
                                             enum SpincatFormat format);

// Runs one reproduction command and writes its artifacts under `out_dir`.
//
// # Safety
// `config` must be valid; `out_dir` a NUL-terminated string.
enum SpincatStatus spincat_run(const struct SpincatConfig *config,
                               enum SpincatCommand command,
                               const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINCAT_H */

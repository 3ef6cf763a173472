#ifndef VCSQSE_H
#define VCSQSE_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum VqStatus {
  VQ_STATUS_OK = 0,
  VQ_STATUS_NULL_POINTER = 1,
  VQ_STATUS_INVALID_ARGUMENT = 2,
  VQ_STATUS_IO = 3,
  VQ_STATUS_PARSE = 4,
  VQ_STATUS_NUMERICAL = 5,
  VQ_STATUS_BUFFER_TOO_SMALL = 6,
  VQ_STATUS_PANIC = 7,
} VqStatus;

// Noise channel applied independently to every qubit.
typedef enum VqChannel {
  VQ_CHANNEL_IDENTITY = 0,
  VQ_CHANNEL_DEPHASING = 1,
  VQ_CHANNEL_AMPLITUDE_PHASE = 2,
  VQ_CHANNEL_DEPOLARIZING = 3,
} VqChannel;

// Expansion basis for the subspace calculation.
typedef enum VqBasis {
  VQ_BASIS_FERMIONIC = 0,
  VQ_BASIS_QUBIT = 1,
} VqBasis;

// A molecular Hamiltonian in its dense qubit representation.
typedef struct VqSystem VqSystem;

// Outcome of a variational channel-state solve.
typedef struct VqVcsResult VqVcsResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated).
//
// `*len` receives the message length excluding the terminator. With a null or
// too-small buffer nothing is copied and `BufferTooSmall` is returned.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_last_error_message(char *buf, uintptr_t capacity, uintptr_t *len);

// Library version as a static NUL-terminated string.
const char *vq_version(void);

// Loads an FCIDUMP file.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_system_from_fcidump(const char *path, struct VqSystem **out);

// Parses FCIDUMP text held in memory.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_system_from_fcidump_text(const char *text, struct VqSystem **out);

// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
void vq_system_free(struct VqSystem *system);

// Number of spin-orbitals (qubits).
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_system_mode_count(const struct VqSystem *system, uintptr_t *out);

// Electron count from the FCIDUMP header.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_system_electron_count(const struct VqSystem *system, uintptr_t *out);

// Exact eigenvalues in the header's electron-number sector, ascending.
//
// `*count` receives the number of levels; with `capacity` smaller than that
// nothing is written and `BufferTooSmall` is returned.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_system_fci_levels(const struct VqSystem *system,
                                   double *levels,
                                   uintptr_t capacity,
                                   uintptr_t *count);

// Solves the variational channel-state problem for `channel` on every qubit.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_vcs_solve(const struct VqSystem *system,
                           enum VqChannel channel,
                           double tp_over_t1,
                           double tp_over_t2,
                           struct VqVcsResult **out);

// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
void vq_vcs_result_free(struct VqVcsResult *result);

// `Tr[ρ_out H]` of the optimal input.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_vcs_energy(const struct VqVcsResult *result, double *out);

// `⟨ψ_in|ρ_out|ψ_in⟩` of the optimal input.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_vcs_fidelity(const struct VqVcsResult *result, double *out);

// `⟨S²⟩` of the optimal input state.
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_vcs_s_squared(const struct VqVcsResult *result, double *out);

// Subspace-expansion levels around the channel output of `result`.
//
// `order` is 1 or 2. Output convention as for [`vq_system_fci_levels`].
//
// # Safety
// Pointer arguments are null or valid for the reads and writes described
// above; handles come from this library and have not been freed.
enum VqStatus vq_qse_levels(const struct VqSystem *system,
                            const struct VqVcsResult *result,
                            enum VqBasis basis,
                            uintptr_t order,
                            double *levels,
                            uintptr_t capacity,
                            uintptr_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VCSQSE_H */

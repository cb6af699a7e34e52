#ifndef PQCYCLES_H
#define PQCYCLES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PqStatus {
  PQ_STATUS_OK = 0,
  // A required pointer argument was null.
  PQ_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  PQ_STATUS_UTF8 = 2,
  // Malformed input text such as a fraction or a JSON document.
  PQ_STATUS_PARSE = 3,
  // Well-formed but unacceptable input, such as an unknown system.
  PQ_STATUS_INVALID_ARGUMENT = 4,
  // The computation ran but could not produce a result.
  PQ_STATUS_COMPUTATION = 5,
  // An internal panic was caught at the boundary.
  PQ_STATUS_PANIC = 6,
} PqStatus;

// Difference-function jet of one system on one switching line.
typedef struct PqJet PqJet;

// Independence ladder built from a jet.
typedef struct PqLadder PqLadder;

// Parameter set for the numeric oracle.
typedef struct PqParams PqParams;

// First-order cycle count of a ladder.
typedef struct PqCountReport {
  uint32_t order;
  uint32_t free_count;
  uint32_t simple_zeros;
  uint32_t pseudo_hopf;
  uint32_t total;
} PqCountReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pq_version(void);

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next library call on the same thread.
const char *pq_last_error(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void pq_string_free(char *s);

// Computes the jet of `system` (`s1`..`s4`, `s1s2`) on the line with
// slope parameter `tau`, to perturbation order `order` (1 or 2) and
// radial order `n`.
//
// # Safety
// String arguments must be null or NUL-terminated; `out` must be null or
// writable.
enum PqStatus pq_jet_expand(const char *system,
                            const char *tau,
                            uint32_t order,
                            uint32_t n,
                            struct PqJet **out);

// Reads a jet from its JSON document.
//
// # Safety
// `json` must be null or NUL-terminated; `out` must be null or writable.
enum PqStatus pq_jet_from_json(const char *json, struct PqJet **out);

// Serializes a jet; free the result with [`pq_string_free`].
//
// # Safety
// `jet` must be null or a live handle; `out` must be null or writable.
enum PqStatus pq_jet_to_json(const struct PqJet *jet, char **out);

// Perturbation order of a jet, or 0 for a null handle.
//
// # Safety
// `jet` must be null or a live handle.
uint32_t pq_jet_order(const struct PqJet *jet);

// Radial order of a jet, or 0 for a null handle.
//
// # Safety
// `jet` must be null or a live handle.
uint32_t pq_jet_radial_order(const struct PqJet *jet);

// Coefficient `psi_{i,j}` rendered as text, e.g. `-1/2*pi*a+10 + b-01`.
// Free the result with [`pq_string_free`].
//
// # Safety
// `jet` must be null or a live handle; `out` must be null or writable.
enum PqStatus pq_jet_coefficient(const struct PqJet *jet, uint32_t i, uint32_t j, char **out);

// Releases a jet. Null is ignored.
//
// # Safety
// `jet` must be null or a handle from this library not yet freed.
void pq_jet_free(struct PqJet *jet);

// Builds the first-order independence ladder of a jet. `policy` is
// `canonical` or `paper`; null means `canonical`.
//
// # Safety
// `jet` must be null or a live handle, `policy` null or NUL-terminated,
// `out` null or writable.
enum PqStatus pq_ladder_build(const struct PqJet *jet, const char *policy, struct PqLadder **out);

// Cycle count guaranteed by the ladder's free coefficients.
//
// # Safety
// `ladder` must be null or a live handle; `out` null or writable.
enum PqStatus pq_ladder_count(const struct PqLadder *ladder, struct PqCountReport *out);

// Releases a ladder. Null is ignored.
//
// # Safety
// `ladder` must be null or a handle from this library not yet freed.
void pq_ladder_free(struct PqLadder *ladder);

// New numeric parameter set on line `tau` with perturbation size `eps`
// and all coefficients zero.
//
// # Safety
// `tau` must be null or NUL-terminated; `out` null or writable.
enum PqStatus pq_params_new(const char *tau, double eps, struct PqParams **out);

// Sets a perturbation coefficient by name (`a+10`, `b-02`, ...) to an
// exact rational value.
//
// # Safety
// `params` must be null or a live handle; strings null or NUL-terminated.
enum PqStatus pq_params_set(struct PqParams *params, const char *name, const char *value);

// Sets a perturbation coefficient by name to the exact value of a double.
//
// # Safety
// `params` must be null or a live handle; `name` null or NUL-terminated.
enum PqStatus pq_params_set_f64(struct PqParams *params, const char *name, double value);

// Releases a parameter set. Null is ignored.
//
// # Safety
// `params` must be null or a handle from this library not yet freed.
void pq_params_free(struct PqParams *params);

// Integrated displacement `Delta(r, eps)` of the perturbed system.
//
// # Safety
// `system` must be null or NUL-terminated, `params` null or a live
// handle, `out` null or writable.
enum PqStatus pq_displacement(const char *system,
                              const struct PqParams *params,
                              double r,
                              double *out);

// Displacement predicted by a jet at the given parameters.
//
// # Safety
// Handles must be null or live; `out` null or writable.
enum PqStatus pq_predicted_delta(const struct PqJet *jet,
                                 const struct PqParams *params,
                                 double r,
                                 double *out);

// `|Delta(r, 0)|` of the unperturbed system, which vanishes for a center.
//
// # Safety
// Strings must be null or NUL-terminated; `out` null or writable.
enum PqStatus pq_center_closure(const char *system, const char *tau, double r, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PQCYCLES_H */

#ifndef TOEPL_H
#define TOEPL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; the nonzero values match the command line exit codes.
typedef enum ToeplStatus {
  TOEPL_STATUS_OK = 0,
  // Null pointer, invalid UTF-8 or an out-of-range argument.
  TOEPL_STATUS_INVALID_ARGUMENT = 1,
  // Malformed spec or potential.
  TOEPL_STATUS_SPEC = 2,
  // Depth, budget, range or pattern error.
  TOEPL_STATUS_RANGE = 3,
  TOEPL_STATUS_VERIFICATION = 4,
  TOEPL_STATUS_IO = 5,
  // A panic was caught at the boundary.
  TOEPL_STATUS_INTERNAL = 6,
} ToeplStatus;

// A potential `(f, g)` for the Jacobi operator.
typedef struct ToeplPotential ToeplPotential;

// A parsed subshift spec.
typedef struct ToeplSpec ToeplSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. Valid until the next failure.
const char *toepl_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void toepl_string_free(char *s);

// Parses a JSON spec.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum ToeplStatus toepl_spec_from_json(const char *json, struct ToeplSpec **out);

// One of the bundled specs: pd, grigorchuk, gen_grigorchuk, nonb, fibonacci.
//
// # Safety
// `name` must be a nul-terminated string; `out` must be writable.
enum ToeplStatus toepl_spec_bundled(const char *name, struct ToeplSpec **out);

// # Safety
// `spec` must come from this library and not have been freed. Null is ignored.
void toepl_spec_free(struct ToeplSpec *spec);

// Writes 1 for a Sturmian spec and 0 for a simple Toeplitz spec.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_spec_is_sturmian(const struct ToeplSpec *spec, int32_t *out);

// `|p^k|` for `k >= -1`.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_block_len(const struct ToeplSpec *spec, int64_t k, uint64_t *out);

// Closed-form factor complexity `p(L)`.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_complexity(const struct ToeplSpec *spec, uint64_t l, uint64_t *out);

// Factor complexity counted from the language, for either kind of spec.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_complexity_oracle(const struct ToeplSpec *spec, uint64_t l, uint64_t *out);

// Closed-form palindrome complexity `P(L)`.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_palindromes(const struct ToeplSpec *spec, uint64_t l, uint64_t *out);

// Closed-form repetitivity `R(L)`; a range error for lengths below the covered range.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_repetitivity(const struct ToeplSpec *spec, uint64_t l, uint64_t *out);

// de Bruijn graph of length-`L` words in DOT form.
//
// # Safety
// Pointers must be valid; free the result with [`toepl_string_free`].
enum ToeplStatus toepl_debruijn_dot(const struct ToeplSpec *spec, uint64_t l, char **out);

// Runs the verification checks; `passed` is 1 when none failed, `report` gets JSON.
// Either output may be null.
//
// # Safety
// `spec` must be valid; non-null outputs must be writable.
enum ToeplStatus toepl_verify(const struct ToeplSpec *spec,
                              uint32_t depth,
                              int32_t *passed,
                              char **report);

// Letter potential: `f(x) = f[x]`, `g(x) = g[x]` for letter index `x`. A null `f` means `f = 1`.
//
// # Safety
// `g` (and `f` when non-null) must point to `len` doubles; `out` must be writable.
enum ToeplStatus toepl_potential_letters(const double *f,
                                         const double *g,
                                         size_t len,
                                         struct ToeplPotential **out);

// # Safety
// `pot` must come from this library and not have been freed. Null is ignored.
void toepl_potential_free(struct ToeplPotential *pot);

// Trace of the transfer matrix over the level-`k` period. `value` may overflow to
// infinity; `ln_abs` holds `ln |trace|` in full range. Either output may be null.
//
// # Safety
// `spec` and `pot` must be valid; non-null outputs must be writable.
enum ToeplStatus toepl_trace(const struct ToeplSpec *spec,
                             const struct ToeplPotential *pot,
                             double energy,
                             int64_t k,
                             double *value,
                             double *ln_abs);

// Lebesgue measure of the level-`k` approximant spectrum found on a grid over `[lo, hi]`.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_spectrum_measure(const struct ToeplSpec *spec,
                                        const struct ToeplPotential *pot,
                                        int64_t k,
                                        double lo,
                                        double hi,
                                        size_t grid,
                                        double *out);

// `(1/j) ln ||A(+-j)||` on the leading word centred at letter index `letter`.
//
// # Safety
// Pointers must be valid.
enum ToeplStatus toepl_lyapunov(const struct ToeplSpec *spec,
                                const struct ToeplPotential *pot,
                                uint32_t letter,
                                double energy,
                                uint64_t j,
                                int32_t backward,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOEPL_H */

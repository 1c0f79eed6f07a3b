#ifndef PRIMEGRID_H
#define PRIMEGRID_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum PgStatus {
  PG_STATUS_OK = 0,
  PG_STATUS_NULL_POINTER = 1,
  PG_STATUS_DOMAIN = 2,
  PG_STATUS_INVARIANT_VIOLATION = 3,
  PG_STATUS_NUMERIC = 4,
  PG_STATUS_RESOURCE = 5,
  PG_STATUS_GENERATION = 6,
  PG_STATUS_FORMAT = 7,
  PG_STATUS_IO = 8,
  PG_STATUS_BUFFER_TOO_SMALL = 9,
  PG_STATUS_PANIC = 10,
} PgStatus;

// Forbidden-word-free sequence generator.
typedef struct PgGenerator PgGenerator;

// Trail over `[2, to]` held in memory.
typedef struct PgTrail PgTrail;

// Closed-form constants.
typedef struct PgConstants {
  double c;
  double bound_bunched;
  double bound_spread;
  double iid_expected_hop;
} PgConstants;

// Calibrated worked example.
typedef struct PgMarkovExample {
  double p1;
  double p2;
  double p_star;
  double expected_hop;
} PgMarkovExample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL,
// or 0 when there is no error.
size_t pg_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *pg_version(void);

// `‖n‖∞`, the largest exponent in the factorization of `n ≥ 1`.
enum PgStatus pg_norm_inf(uint64_t n, uint32_t *out);

enum PgStatus pg_constants(struct PgConstants *out);

// `q_k = 1/ζ(k+1) − 1/ζ(k)` for `k ≥ 1`.
enum PgStatus pg_letter_density(uint32_t k, double *out);

// Computes the trail up to `to` inclusive.
enum PgStatus pg_trail_compute(uint64_t to, uint64_t segment_size, struct PgTrail **out);

void pg_trail_free(struct PgTrail *t);

// Number of primes covered, or 0 for a null handle.
uint64_t pg_trail_prime_count(const struct PgTrail *t);

// `L∞(to)`, or 0 for a null handle.
uint64_t pg_trail_length(const struct PgTrail *t);

// Copies `L∞(p_1), L∞(p_2), …` into `buf`. `*written` receives the number
// of values, also when the buffer is too small.
enum PgStatus pg_trail_stops(const struct PgTrail *t, uint64_t *buf, size_t len, size_t *written);

// Copies the primes `p_1, p_2, …` into `buf`.
enum PgStatus pg_trail_primes(const struct PgTrail *t, uint64_t *buf, size_t len, size_t *written);

// `which`: 0 = nothing eliminated, 1 = `{1111}`, 2 = `{1111, 11121112}`.
enum PgStatus pg_markov_example(uint32_t which, struct PgMarkovExample *out);

// `model` is 1 or 2; `p` points at 26 probabilities (letters 1…25, then ★).
enum PgStatus pg_generator_new(uint32_t model,
                               const double *p,
                               uint64_t seed,
                               struct PgGenerator **out);

// Fills `buf` with the next `len` letters (1…25, 26 for ★).
enum PgStatus pg_generator_next(struct PgGenerator *g, uint8_t *buf, size_t len);

void pg_generator_free(struct PgGenerator *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRIMEGRID_H */

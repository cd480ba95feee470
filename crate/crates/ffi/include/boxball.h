#ifndef BOXBALL_H
#define BOXBALL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BbStatus {
  BB_STATUS_OK = 0,
  BB_STATUS_NULL_POINTER = 1,
  BB_STATUS_INVALID_ARGUMENT = 2,
  BB_STATUS_INVALID_CONFIG = 3,
  BB_STATUS_DIMENSION = 4,
  BB_STATUS_BUFFER_TOO_SMALL = 5,
  BB_STATUS_IO = 6,
  BB_STATUS_PANIC = 99,
} BbStatus;

/*
 Opaque boundary-cell partition with its reflection matrix.
 */
typedef struct BbPartition BbPartition;

/*
 Opaque continuous-time PushTASEP.
 */
typedef struct BbPushtasep BbPushtasep;

/*
 Opaque SBBS simulator.
 */
typedef struct BbSbbs BbSbbs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failure on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *bb_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *bb_version(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void bb_string_free(char *s);

/*
 Creates a simulator from `d` strictly increasing positions.

 # Safety
 `positions` must point to `d` values and `out` to writable storage.
 */
enum BbStatus bb_sbbs_new(const int64_t *positions,
                          size_t d,
                          int64_t eps_num,
                          int64_t eps_den,
                          uint32_t cap,
                          uint64_t seed,
                          uint64_t stream,
                          struct BbSbbs **out);

/*
 Advances `n` carrier sweeps.

 # Safety
 `h` must be a live handle.
 */
enum BbStatus bb_sbbs_step(struct BbSbbs *h, uint64_t n);

/*
 Number of sweeps performed so far.

 # Safety
 `h` must be a live handle or null.
 */
uint64_t bb_sbbs_steps(const struct BbSbbs *h);

/*
 Copies the `d` positions into `out`; `needed` (nullable) receives `d`.

 # Safety
 `h` must be a live handle and `out` must hold `len` values.
 */
enum BbStatus bb_sbbs_positions(const struct BbSbbs *h, int64_t *out, size_t len, size_t *needed);

/*
 Copies the `d - 1` gaps into `out`.

 # Safety
 `h` must be a live handle and `out` must hold `len` values.
 */
enum BbStatus bb_sbbs_gaps(const struct BbSbbs *h, int64_t *out, size_t len, size_t *needed);

/*
 # Safety
 `h` must come from `bb_sbbs_new` and not be freed twice.
 */
void bb_sbbs_free(struct BbSbbs *h);

/*
 # Safety
 `positions` must point to `d` values and `out` to writable storage.
 */
enum BbStatus bb_pushtasep_new(const int64_t *positions,
                               size_t d,
                               uint64_t seed,
                               uint64_t stream,
                               struct BbPushtasep **out);

/*
 Runs until `horizon`; `events` and `boundary_time` (both nullable) receive
 the jumps made and the time spent with a zero gap during this call.

 # Safety
 `h` must be a live handle.
 */
enum BbStatus bb_pushtasep_run_until(struct BbPushtasep *h,
                                     double horizon,
                                     uint64_t *events,
                                     double *boundary_time);

/*
 # Safety
 `h` must be a live handle or null.
 */
double bb_pushtasep_time(const struct BbPushtasep *h);

/*
 # Safety
 `h` must be a live handle and `out` must hold `len` values.
 */
enum BbStatus bb_pushtasep_positions(const struct BbPushtasep *h,
                                     int64_t *out,
                                     size_t len,
                                     size_t *needed);

/*
 # Safety
 `h` must come from `bb_pushtasep_new` and not be freed twice.
 */
void bb_pushtasep_free(struct BbPushtasep *h);

/*
 SBBS partition for `d` balls and capacity `cap`, with reflection vectors
 at `eps_num / eps_den`.

 # Safety
 `out` must point to writable storage.
 */
enum BbStatus bb_partition_new(size_t d,
                               uint32_t cap,
                               int64_t eps_num,
                               int64_t eps_den,
                               struct BbPartition **out);

/*
 PushTASEP partition for `d` particles.

 # Safety
 `out` must point to writable storage.
 */
enum BbStatus bb_partition_new_pushtasep(size_t d, struct BbPartition **out);

/*
 Number of cells `k`, or 0 for a null handle.

 # Safety
 `h` must be a live handle or null.
 */
size_t bb_partition_cells(const struct BbPartition *h);

/*
 Representative of cell `cell` (0-based) into `out` (`d - 1` values).

 # Safety
 `h` must be a live handle and `out` must hold `len` values.
 */
enum BbStatus bb_partition_representative(const struct BbPartition *h,
                                          size_t cell,
                                          int64_t *out,
                                          size_t len,
                                          size_t *needed);

/*
 Cell (0-based) containing the gap vector `w`, or -1 in the interior.

 # Safety
 `h` must be a live handle and `w` must hold `len` values.
 */
enum BbStatus bb_partition_cell_of(const struct BbPartition *h,
                                   const int64_t *w,
                                   size_t len,
                                   int64_t *cell);

/*
 Reflection matrix in row-major order as doubles, `(d - 1) * k` values.

 # Safety
 `h` must be a live handle and `out` must hold `len` values.
 */
enum BbStatus bb_partition_reflection(const struct BbPartition *h,
                                      double *out,
                                      size_t len,
                                      size_t *needed);

/*
 Runs the exact weakly-completely-S search; `certified` receives 1 or 0.

 # Safety
 `h` must be a live handle and `certified` writable.
 */
enum BbStatus bb_partition_scertify(const struct BbPartition *h, int32_t *certified);

/*
 Partition and reflection matrix as JSON with `p/q` entries. Release the
 string with `bb_string_free`.

 # Safety
 `h` must be a live handle and `out` writable.
 */
enum BbStatus bb_partition_json(const struct BbPartition *h, char **out);

/*
 # Safety
 `h` must come from a `bb_partition_new*` call and not be freed twice.
 */
void bb_partition_free(struct BbPartition *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOXBALL_H */

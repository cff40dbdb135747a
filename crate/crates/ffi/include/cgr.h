#ifndef CGR_H
#define CGR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CGR_UNIT_PAIR 0

#define CGR_UNIT_DATASET_CLUSTER 1

#define CGR_UNIT_SOLVER_CLUSTER 2

#define CGR_AXIS_DATASET 0

#define CGR_AXIS_SOLVER 1

typedef enum CgrStatus {
  CGR_STATUS_OK = 0,
  CGR_STATUS_NULL_ARGUMENT = 1,
  CGR_STATUS_INVALID_UTF8 = 2,
  CGR_STATUS_INVALID_ARGUMENT = 3,
  CGR_STATUS_IO = 4,
  CGR_STATUS_PARSE = 5,
  CGR_STATUS_EMPTY_INPUT = 6,
  CGR_STATUS_UNDEFINED = 7,
  CGR_STATUS_PANIC = 99,
} CgrStatus;

/**
 * Opaque set of per-pair accuracy summaries.
 */
typedef struct CgrPairSet CgrPairSet;

typedef struct CgrPartition {
  double tau;
  uint32_t kept_pairs;
  uint64_t n_records;
  double macro_direct;
  double macro_assisted;
  double macro_gen;
  double delta;
  /**
   * Sample standard deviations across the kept pairs.
   */
  double sd_direct;
  double sd_assisted;
  double sd_delta;
} CgrPartition;

typedef struct CgrInterval {
  double point_estimate;
  double ci_low;
  double ci_high;
} CgrInterval;

typedef struct CgrRange {
  double min;
  double max;
} CgrRange;

typedef struct CgrExtraction {
  /**
   * ASCII code of the extracted letter; 'X' also for no match.
   */
  uint8_t letter;
  /**
   * Character offsets of the match, or -1 when nothing matched.
   */
  int64_t span_start;
  int64_t span_end;
} CgrExtraction;

typedef struct CgrScanReport {
  uint32_t literal_answer_hits;
  uint32_t call_sites;
  bool has_return_contract;
} CgrScanReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cgr_last_error_message(void);

/**
 * Loads a line-delimited pair-summary file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CgrStatus cgr_pairs_load(const char *path, struct CgrPairSet **out);

/**
 * The bundled retained-pair fixture.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum CgrStatus cgr_pairs_bundled(struct CgrPairSet **out);

/**
 * Releases a pair set. NULL is ignored.
 *
 * # Safety
 * `set` must come from `cgr_pairs_load` or `cgr_pairs_bundled` and not be
 * freed twice.
 */
void cgr_pairs_free(struct CgrPairSet *set);

/**
 * Number of pairs in the set, 0 for NULL.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t cgr_pairs_len(const struct CgrPairSet *set);

/**
 * Macro summary over pairs whose direct accuracy is strictly above `tau`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum CgrStatus cgr_partition(const struct CgrPairSet *set, double tau, struct CgrPartition *out);

/**
 * Macro summary over pairs whose direct accuracy is exactly zero.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum CgrStatus cgr_zero_baseline(const struct CgrPairSet *set, struct CgrPartition *out);

/**
 * Share of the direct-to-generator gap closed by the assisted channel.
 *
 * # Safety
 * `out` must be writable.
 */
enum CgrStatus cgr_gap_closure(double direct, double assisted, double generator, double *out);

/**
 * Percentile bootstrap 95% interval of the macro delta over the pairs kept at
 * `tau`. `unit` is one of the `CGR_UNIT_*` constants.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum CgrStatus cgr_bootstrap(const struct CgrPairSet *set,
                             double tau,
                             uint32_t unit,
                             size_t replicates,
                             uint64_t seed,
                             struct CgrInterval *out);

/**
 * Range of the macro delta with one dataset or solver removed at a time.
 * `axis` is one of the `CGR_AXIS_*` constants.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum CgrStatus cgr_leave_one_out(const struct CgrPairSet *set,
                                 double tau,
                                 uint32_t axis,
                                 struct CgrRange *out);

/**
 * First standalone capital letter in `text`.
 *
 * # Safety
 * `text` must be NUL-terminated UTF-8 and `out` writable.
 */
enum CgrStatus cgr_extract_answer(const char *text, struct CgrExtraction *out);

/**
 * First standalone capital letter that appears in `option_ids`, a string of
 * capital letters such as "ABCD".
 *
 * # Safety
 * Both strings must be NUL-terminated UTF-8 and `out` writable.
 */
enum CgrStatus cgr_extract_answer_in_set(const char *text,
                                         const char *option_ids,
                                         struct CgrExtraction *out);

/**
 * Static checks over one scaffold source.
 *
 * # Safety
 * `source` must be NUL-terminated UTF-8 and `out` writable.
 */
enum CgrStatus cgr_scan_scaffold(const char *source, struct CgrScanReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CGR_H */

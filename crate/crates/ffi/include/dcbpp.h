#ifndef DCBPP_H
#define DCBPP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum DcbppStatus {
  DCBPP_STATUS_OK = 0,
  DCBPP_STATUS_NULL_POINTER = 1,
  DCBPP_STATUS_INVALID_ARGUMENT = 2,
  DCBPP_STATUS_INVALID_INSTANCE = 3,
  DCBPP_STATUS_COVER_INFEASIBLE = 4,
  DCBPP_STATUS_CAP_EXCEEDED = 5,
  DCBPP_STATUS_OVERFLOW = 6,
  DCBPP_STATUS_INTERNAL = 7,
} DcbppStatus;

typedef enum DcbppAnsatz {
  DCBPP_ANSATZ_QAOA = 0,
  DCBPP_ANSATZ_DC_QAOA = 1,
  DCBPP_ANSATZ_CD_INSPIRED = 2,
  DCBPP_ANSATZ_CD_MIXER = 3,
} DcbppAnsatz;

// Opaque instance handle.
typedef struct DcbppInstance DcbppInstance;

// Opaque run report handle.
typedef struct DcbppReport DcbppReport;

// Pipeline settings. Fill with [`dcbpp_run_config_default`] first.
typedef struct DcbppRunConfig {
  enum DcbppAnsatz ansatz;
  size_t layers;
  double stepsize;
  size_t iterations;
  size_t trials;
  double learning_rate;
  uint64_t seed;
  // Negative selects the default `2^-n`.
  double threshold;
  // 0 reads exact distributions.
  uint64_t shots;
  bool cd_weighted;
  double penalty;
} DcbppRunConfig;

typedef struct DcbppMetrics {
  double fr;
  double fr_mean;
  double fr_std;
  size_t fps;
  size_t ips;
  size_t exact_fps;
  // False when the sampled blocks could not cover every item.
  bool cover_found;
  // Zero unless `cover_found`.
  size_t m_opt;
  uint64_t fs_unordered;
} DcbppMetrics;

typedef struct DcbppOracle {
  size_t fps;
  size_t m_opt;
  uint64_t fs_unordered;
  uint64_t fs_ordered;
} DcbppOracle;

typedef struct DcbppGateCounts {
  size_t parameterized;
  size_t cnot;
  size_t total;
  size_t reference_parameterized;
  size_t reference_cnot;
  size_t reference_total;
} DcbppGateCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call on the same thread.
const char *dcbpp_last_error(void);

// Creates an instance from `n` weights.
//
// # Safety
// `weights` must point to `n` readable values and `out` must be writable.
enum DcbppStatus dcbpp_instance_new(const uint64_t *weights,
                                    size_t n,
                                    uint64_t capacity,
                                    struct DcbppInstance **out);

// Parses an instance from JSON text (`{"capacity": C, "weights": [...]}`).
//
// # Safety
// `json` must be a NUL-terminated string and `out` must be writable.
enum DcbppStatus dcbpp_instance_from_json(const char *json, struct DcbppInstance **out);

// # Safety
// `inst` must come from this library and not be used afterwards. Null is ignored.
void dcbpp_instance_free(struct DcbppInstance *inst);

// Item count, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t dcbpp_instance_num_items(const struct DcbppInstance *inst);

// Writes the library defaults into `out`.
//
// # Safety
// `out` must be null or writable.
void dcbpp_run_config_default(struct DcbppRunConfig *out);

// Runs the full pipeline. A run whose samples cannot cover every item still
// produces a report; check `cover_found` in its metrics.
//
// # Safety
// `inst` and `cfg` must be live, `out` writable.
enum DcbppStatus dcbpp_run(const struct DcbppInstance *inst,
                           const struct DcbppRunConfig *cfg,
                           struct DcbppReport **out);

// # Safety
// `report` must come from this library and not be used afterwards. Null is ignored.
void dcbpp_report_free(struct DcbppReport *report);

// # Safety
// `report` must be live and `out` writable.
enum DcbppStatus dcbpp_report_metrics(const struct DcbppReport *report, struct DcbppMetrics *out);

// The full report as JSON, or null on failure. Free with [`dcbpp_string_free`].
//
// # Safety
// `report` must be null or live.
char *dcbpp_report_to_json(const struct DcbppReport *report);

// # Safety
// `s` must come from this library and not be used afterwards. Null is ignored.
void dcbpp_string_free(char *s);

// Brute-force ground truth.
//
// # Safety
// `inst` must be live and `out` writable.
enum DcbppStatus dcbpp_oracle(const struct DcbppInstance *inst, struct DcbppOracle *out);

// Per-layer gate counts for `n` items.
//
// # Safety
// `out` must be writable.
enum DcbppStatus dcbpp_gate_counts(enum DcbppAnsatz ansatz, size_t n, struct DcbppGateCounts *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DCBPP_H */

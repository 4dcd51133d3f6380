#ifndef HEATFLUX_H
#define HEATFLUX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_ARGUMENT = 2,
  HF_STATUS_CONFIG = 3,
  HF_STATUS_NUMERICAL = 4,
  HF_STATUS_IO = 5,
  HF_STATUS_PANIC = 6,
} HfStatus;

// Run configuration.
typedef struct HfConfig HfConfig;

// Results of one experiment.
typedef struct HfRun HfRun;

// Headline numbers of a run.
typedef struct HfSummary {
  double eta_ey;
  double eta_y;
  double error_ey;
  double error_y;
  double effectivity_ey;
  double effectivity_y;
  double max_equilibration;
  double max_local_efficiency;
  size_t n_checks;
  size_t n_failed;
  // 1 if every enabled check passed.
  int32_t passed;
} HfSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes). Returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t hf_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *hf_version(void);

// New configuration with default values.
struct HfConfig *hf_config_new(void);

// # Safety
// `cfg` must be null or a handle from [`hf_config_new`] not yet freed.
void hf_config_free(struct HfConfig *cfg);

// Sets one key, using the same keys and value syntax as config files.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
enum HfStatus hf_config_set(struct HfConfig *cfg, const char *key, const char *value);

// Applies a whole `key = value` text, one entry per line.
//
// # Safety
// `cfg` must be a live handle; `text` a NUL-terminated string.
enum HfStatus hf_config_apply(struct HfConfig *cfg, const char *text);

// Solves, estimates and verifies. On success `*out` receives a new handle.
//
// # Safety
// `cfg` must be a live handle and `out` a valid pointer.
enum HfStatus hf_run(const struct HfConfig *cfg, struct HfRun **out);

// # Safety
// `run` must be null or a handle from [`hf_run`] not yet freed.
void hf_run_free(struct HfRun *run);

// # Safety
// `run` must be a live handle and `out` a valid pointer.
enum HfStatus hf_run_summary(const struct HfRun *run, struct HfSummary *out);

// Writes the CSV reports into `dir`, creating it if needed.
//
// # Safety
// `run` must be a live handle; `dir` a NUL-terminated path.
enum HfStatus hf_run_write_reports(const struct HfRun *run, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEATFLUX_H */

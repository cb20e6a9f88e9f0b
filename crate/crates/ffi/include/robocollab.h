#ifndef ROBOCOLLAB_H
#define ROBOCOLLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible entry point.
 */
typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_UTF8 = 2,
  RC_STATUS_INVALID_ARGUMENT = 3,
  RC_STATUS_SCENARIO_INVALID = 4,
  RC_STATUS_EPISODE_FAILED = 5,
  RC_STATUS_LOG_CORRUPT = 6,
  RC_STATUS_DRIFT_DETECTED = 7,
  RC_STATUS_PANIC = 8,
} RcStatus;

typedef enum RcLayout {
  RC_LAYOUT_KITCHEN = 0,
  RC_LAYOUT_BATHROOM = 1,
  RC_LAYOUT_BEDROOM = 2,
} RcLayout;

typedef enum RcTask {
  RC_TASK_PACK_OBJECTS = 0,
  RC_TASK_SORT_SOLIDS = 1,
  RC_TASK_MAKE_SANDWICH = 2,
} RcTask;

typedef enum RcBackend {
  RC_BACKEND_ORACLE = 0,
  RC_BACKEND_ALWAYS_WAIT = 1,
  RC_BACKEND_CHAT = 2,
} RcBackend;

/**
 * Opaque finished-episode handle.
 */
typedef struct RcEpisode RcEpisode;

/**
 * Opaque scenario handle.
 */
typedef struct RcScenario RcScenario;

/**
 * Episode settings. Start from [`rc_run_options_default`].
 */
typedef struct RcRunOptions {
  uint32_t horizon;
  uint64_t seed;
  /**
   * An [`RcBackend`] value.
   */
  uint32_t backend;
  bool no_feedback;
  bool no_history;
  bool no_mobile_robot;
  /**
   * Nullable; JSONL log destination.
   */
  const char *log_path;
  /**
   * Required for the chat backend.
   */
  const char *endpoint;
  /**
   * Required for the chat backend.
   */
  const char *model;
  double temperature;
} RcRunOptions;

typedef struct RcMetrics {
  bool success;
  double partial_success;
  uint32_t temporal_steps;
  uint32_t action_steps;
  uint32_t decisions;
  uint32_t parse_failures;
  uint32_t first_try_parses;
  uint32_t backend_errors;
} RcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *rc_last_error(void);

/**
 * Library version, static storage.
 */
const char *rc_version(void);

/**
 * Loads and validates a scenario file.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum RcStatus rc_scenario_load(const char *path, struct RcScenario **out);

/**
 * Builds one of the shipped configurations in memory. `layout` is an
 * [`RcLayout`] value, `task` an [`RcTask`] value.
 *
 * # Safety
 * `out` is writable.
 */
enum RcStatus rc_scenario_generate(uint32_t layout,
                                   uint32_t task,
                                   uint32_t objects,
                                   struct RcScenario **out);

/**
 * # Safety
 * `scenario` is null or a handle not yet freed.
 */
void rc_scenario_free(struct RcScenario *scenario);

struct RcRunOptions rc_run_options_default(void);

/**
 * Runs one episode. `options` may be null for the defaults.
 *
 * # Safety
 * `scenario` is a live handle; `options` is null or valid; `out` is writable.
 */
enum RcStatus rc_run_episode(const struct RcScenario *scenario,
                             const struct RcRunOptions *options,
                             struct RcEpisode **out);

/**
 * # Safety
 * `episode` is a live handle; `out` is writable.
 */
enum RcStatus rc_episode_metrics(const struct RcEpisode *episode, struct RcMetrics *out);

/**
 * The episode log as JSONL. Release with [`rc_string_free`].
 *
 * # Safety
 * `episode` is a live handle; `out` is writable.
 */
enum RcStatus rc_episode_log(const struct RcEpisode *episode, char **out);

/**
 * # Safety
 * `episode` is null or a handle not yet freed.
 */
void rc_episode_free(struct RcEpisode *episode);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void rc_string_free(char *s);

/**
 * Re-executes a log file. `out` may be null when only the verdict matters.
 *
 * # Safety
 * `log_path` is a NUL-terminated string; `out` is null or writable.
 */
enum RcStatus rc_replay(const char *log_path, struct RcMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBOCOLLAB_H */

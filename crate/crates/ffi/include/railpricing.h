#ifndef RAILPRICING_H
#define RAILPRICING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_INVALID_ARGUMENT = 2,
  RP_STATUS_SCENARIO_ERROR = 3,
  RP_STATUS_NOT_RESET = 4,
  RP_STATUS_EPISODE_TERMINAL = 5,
  RP_STATUS_MALFORMED_ACTION = 6,
  RP_STATUS_BUFFER_TOO_SMALL = 7,
  RP_STATUS_DEGENERATE_INPUT = 8,
  RP_STATUS_PANIC = 9,
} RpStatus;

/**
 * Opaque environment handle.
 */
typedef struct RpEnv RpEnv;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an environment from a preset name (`business`,
 * `business_student`). `discrete` selects the eleven-level action mode.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RpStatus rp_env_new_preset(const char *name, int discrete, struct RpEnv **out);

/**
 * Creates an environment from a scenario TOML document.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RpStatus rp_env_new_from_toml(const char *toml, int discrete, struct RpEnv **out);

/**
 * Releases an environment. Null is ignored.
 *
 * # Safety
 * `env` must come from `rp_env_new_*` and not be used afterwards.
 */
void rp_env_free(struct RpEnv *env);

/**
 * Number of agents.
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_env_agent_count(const struct RpEnv *env, size_t *out);

/**
 * Action length of agent `agent` (scenario order).
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_env_action_dim(const struct RpEnv *env, size_t agent, size_t *out);

/**
 * Starts a new episode.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum RpStatus rp_env_reset(struct RpEnv *env, uint64_t seed);

/**
 * Current day, 0 after reset.
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_env_day(const struct RpEnv *env, uint32_t *out);

/**
 * Advances one day. `actions` holds every agent's action concatenated in
 * agent order (`rp_env_action_dim` values each; level numbers in discrete
 * mode). Rewards are written per agent to `rewards`, which must hold
 * `rewards_len >= agent count` values.
 *
 * # Safety
 * Pointers must be valid for the given lengths; `terminal` may be null.
 */
enum RpStatus rp_env_step(struct RpEnv *env,
                          const double *actions,
                          size_t actions_len,
                          double *rewards,
                          size_t rewards_len,
                          int *terminal);

/**
 * Agent `agent`'s current observation as a JSON string. Release it with
 * `rp_string_free`.
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_env_observation_json(const struct RpEnv *env, size_t agent, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void rp_string_free(char *s);

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *rp_last_error_message(void);

/**
 * Profit equality of `n` nonnegative profits.
 *
 * # Safety
 * `profits` must point to `n` values and `out` must be valid.
 */
enum RpStatus rp_metrics_equality(const double *profits, size_t n, double *out);

/**
 * Library version as a static string.
 */
const char *rp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAILPRICING_H */

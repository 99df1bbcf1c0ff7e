/* SPDX-License-Identifier: Apache-2.0 */

#ifndef ARENA_H
#define ARENA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ArenaStatus {
  ARENA_STATUS_OK = 0,
  ARENA_STATUS_NULL_ARGUMENT = 1,
  ARENA_STATUS_INVALID_UTF8 = 2,
  ARENA_STATUS_INVALID_JSON = 3,
  /**
   * The source failed to parse or typecheck.
   */
  ARENA_STATUS_COMPILE_ERROR = 4,
  /**
   * Unknown function or arguments that do not fit its signature.
   */
  ARENA_STATUS_CALL_ERROR = 5,
  ARENA_STATUS_EQUIVALENCE_ERROR = 6,
  /**
   * The event log is corrupt or does not replay.
   */
  ARENA_STATUS_REPLAY_ERROR = 7,
  ARENA_STATUS_INVALID_ARGUMENT = 8,
  ARENA_STATUS_PANIC = 99,
} ArenaStatus;

/**
 * A replayed game.
 */
typedef struct ArenaGame ArenaGame;

/**
 * A compiled unit.
 */
typedef struct ArenaUnit ArenaUnit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Compiles MiniLang `source`. On success `*out` holds a unit to release
 * with [`arena_unit_free`].
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` a writable pointer.
 */
enum ArenaStatus arena_unit_parse(const char *source, struct ArenaUnit **out);

/**
 * # Safety
 * `unit` must be null or a pointer from [`arena_unit_parse`] not yet freed.
 */
void arena_unit_free(struct ArenaUnit *unit);

/**
 * Calls `function` with `args_json` (a JSON array of ints, bools and int
 * arrays) under a step budget. `*out_json` receives
 * `{"outcome": ..., "covered_lines": [...], "steps_used": n}`.
 *
 * # Safety
 * Pointers must be valid as described in the module conventions.
 */
enum ArenaStatus arena_unit_evaluate(const struct ArenaUnit *unit,
                                     const char *function,
                                     const char *args_json,
                                     uint64_t step_budget,
                                     char **out_json);

/**
 * Enumerates mutants for a comma-separated operator list (`"AOR,ROR"`), or
 * all operators when `operators` is null. `*out_json` receives an array of
 * candidates with their mutated sources.
 *
 * # Safety
 * Pointers must be valid as described in the module conventions.
 */
enum ArenaStatus arena_mutants_enumerate(const struct ArenaUnit *unit,
                                         const char *operators,
                                         char **out_json);

/**
 * Compares `function` in both units on every tuple with int parameters in
 * `[lo, hi]` (bool and array parameters use their default domains).
 * `*out_json` receives the verdict.
 *
 * # Safety
 * Pointers must be valid as described in the module conventions.
 */
enum ArenaStatus arena_equivalence_check(const struct ArenaUnit *original,
                                         const struct ArenaUnit *mutant,
                                         const char *function,
                                         int64_t lo,
                                         int64_t hi,
                                         uint64_t step_budget,
                                         char **out_json);

/**
 * Folds an NDJSON event log. On success `*out` holds a game to release
 * with [`arena_game_free`].
 *
 * # Safety
 * Pointers must be valid as described in the module conventions.
 */
enum ArenaStatus arena_game_replay(const char *log, struct ArenaGame **out);

/**
 * Canonical JSON of the folded state.
 *
 * # Safety
 * Pointers must be valid as described in the module conventions.
 */
enum ArenaStatus arena_game_state_json(const struct ArenaGame *game, char **out_json);

/**
 * Hex SHA-256 of the canonical state.
 *
 * # Safety
 * Pointers must be valid as described in the module conventions.
 */
enum ArenaStatus arena_game_state_hash(const struct ArenaGame *game, char **out_hex);

/**
 * Per-player, per-team, per-mutant and per-test points.
 *
 * # Safety
 * Pointers must be valid as described in the module conventions.
 */
enum ArenaStatus arena_game_scoreboard_json(const struct ArenaGame *game, char **out_json);

/**
 * # Safety
 * `game` must be null or a pointer from [`arena_game_replay`] not yet freed.
 */
void arena_game_free(struct ArenaGame *game);

/**
 * The module error code of this thread's last failure (for example
 * `SYNTAX_ERROR`), or null. Release with [`arena_string_free`].
 */
char *arena_last_error_code(void);

/**
 * Human-readable message for this thread's last failure, or null.
 * Release with [`arena_string_free`].
 */
char *arena_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void arena_string_free(char *s);

/**
 * Library version, statically allocated.
 */
const char *arena_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARENA_H */

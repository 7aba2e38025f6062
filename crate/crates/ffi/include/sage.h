#ifndef SAGE_H
#define SAGE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum SageStatus {
  SAGE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SAGE_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument was out of range, not UTF-8 or otherwise malformed.
   */
  SAGE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A file could not be read or written.
   */
  SAGE_STATUS_IO = 3,
  /**
   * Input data failed to parse or validate.
   */
  SAGE_STATUS_DATA = 4,
  /**
   * No path or no result exists.
   */
  SAGE_STATUS_NOT_FOUND = 5,
  /**
   * A computation produced a non-finite value.
   */
  SAGE_STATUS_NUMERIC = 6,
  /**
   * Internal panic; the handle arguments should be considered unusable.
   */
  SAGE_STATUS_PANIC = 7,
} SageStatus;

/**
 * An occupancy grid with its distance field.
 */
typedef struct SageGrid SageGrid;

/**
 * A loaded experience store.
 */
typedef struct SageStore SageStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a successful call.
 * The pointer stays valid until the next `sage_*` call on the same thread.
 */
const char *sage_last_error(void);

/**
 * Parses a grid in the text format: a `W H RESOLUTION` header, then `H` rows of `W` characters.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum SageStatus sage_grid_parse(const char *text, struct SageGrid **out);

/**
 * Generates the default-size procedural maze for `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SageStatus sage_grid_maze(uint64_t seed, struct SageGrid **out);

/**
 * Releases a grid. Null is ignored.
 *
 * # Safety
 * `grid` must come from this library and not be used afterwards.
 */
void sage_grid_free(struct SageGrid *grid);

/**
 * Width and height in cells and the cell size in meters.
 *
 * # Safety
 * `grid` must be a live handle; the out pointers must be writable.
 */
enum SageStatus sage_grid_size(const struct SageGrid *grid,
                               uintptr_t *width,
                               uintptr_t *height,
                               double *resolution);

/**
 * Distance in meters from cell `(x, y)` to the nearest obstacle; +infinity without obstacles.
 *
 * # Safety
 * `grid` must be a live handle; `out` must be writable.
 */
enum SageStatus sage_grid_clearance(const struct SageGrid *grid,
                                    uintptr_t x,
                                    uintptr_t y,
                                    double *out);

/**
 * Shortest 8-connected path over cells with clearance of at least `delta_cells`.
 * Writes the path length in meters and the number of cells on it.
 *
 * # Safety
 * `grid` must be a live handle; the out pointers must be writable.
 */
enum SageStatus sage_grid_plan(const struct SageGrid *grid,
                               uintptr_t start_x,
                               uintptr_t start_y,
                               uintptr_t goal_x,
                               uintptr_t goal_y,
                               double delta_cells,
                               double *length,
                               uintptr_t *cells);

/**
 * Loads a rule store written by `genesis` or `evolve`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SageStatus sage_store_load(const char *path, struct SageStore **out);

/**
 * Releases a store. Null is ignored.
 *
 * # Safety
 * `store` must come from this library and not be used afterwards.
 */
void sage_store_free(struct SageStore *store);

/**
 * Number of rules in the store, or 0 for a null handle.
 *
 * # Safety
 * `store` must be null or a live handle.
 */
uintptr_t sage_store_len(const struct SageStore *store);

/**
 * Copies the best-matching rule's full text into `buf` (NUL-terminated, truncated to
 * `capacity`) and writes its cosine score. Returns `NotFound` on an empty store.
 *
 * # Safety
 * `store` must be a live handle, `task` and `scene` NUL-terminated strings, `buf`
 * writable for `capacity` bytes and `score` writable.
 */
enum SageStatus sage_store_best_rule(const struct SageStore *store,
                                     const char *task,
                                     const char *scene,
                                     char *buf,
                                     uintptr_t capacity,
                                     double *score);

/**
 * Clipped surrogate for one sample: shared lower bound `1 - eps_std`, upper bound
 * `1 + eps_exp` for experience-augmented samples and `1 + eps_std` otherwise.
 *
 * # Safety
 * `out` must be writable.
 */
enum SageStatus sage_aac_objective(double rho,
                                   double advantage,
                                   bool augmented,
                                   double eps_std,
                                   double eps_exp,
                                   double *out);

/**
 * Injection probability for a best validation reward `r_val`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SageStatus sage_eta(double r_val,
                         double eta_init,
                         double eta_min,
                         double r_target,
                         double *out);

/**
 * Rubric judge score (1..5) of `answer` against `truth`.
 *
 * # Safety
 * Both strings must be NUL-terminated; `out` must be writable.
 */
enum SageStatus sage_judge(const char *answer, const char *truth, uint8_t *out);

/**
 * Runs task synthesis into `out_dir`, exactly as the `genesis` command does.
 * `config_json` may be null for the defaults; `procedural_mazes` overrides the maze
 * count and `n_tasks` the total task count. Writes the accepted count to `accepted`.
 *
 * # Safety
 * `config_json` must be null or NUL-terminated, `out_dir` NUL-terminated and
 * `accepted` writable.
 */
enum SageStatus sage_genesis_run(const char *config_json,
                                 const char *out_dir,
                                 uintptr_t procedural_mazes,
                                 uintptr_t n_tasks,
                                 uint64_t seed,
                                 uintptr_t *accepted);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAGE_H */

#ifndef AFBENCH_H
#define AFBENCH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum afb_status {
  AFB_OK = 0,
  AFB_INVALID_ARGUMENT = 1, /* bad parameters or configuration */
  AFB_IO = 2,               /* missing or unopenable files */
  AFB_DATA = 3,             /* malformed or inconsistent file contents */
  AFB_INTERNAL = 4
} afb_status;

/* Message describing the most recent failure on the calling thread. */
const char* afb_last_error(void);

/* ---------------------------------------------------------------------------
 * Handles
 * ------------------------------------------------------------------------- */

typedef struct afb_camera afb_camera;
typedef struct afb_stack afb_stack;

afb_status afb_camera_default(afb_camera** out);
afb_status afb_camera_load(const char* json_path, afb_camera** out);
void afb_camera_free(afb_camera* cam);
afb_status afb_camera_ladder_size(const afb_camera* cam, int* out);

afb_status afb_stack_load(const char* dir, afb_stack** out);
void afb_stack_free(afb_stack* stack);
afb_status afb_stack_slice_count(const afb_stack* stack, int* out);
/* Writes -1 when the stack carries no ground-truth index. */
afb_status afb_stack_ground_truth(const afb_stack* stack, int* out);
/* Sharpest slice by a contrast metric over the green channel. */
afb_status afb_stack_solve_contrast(const afb_stack* stack, const char* metric_id,
                                    int* out);
/* Best-matched slice by a dual-pixel mismatch metric. */
afb_status afb_stack_solve_dp(const afb_stack* stack, const char* metric_id,
                              int* out);
/* One-shot prediction from the disparity measured on slice k. */
afb_status afb_stack_solve_single_slice(const afb_stack* stack,
                                        const afb_camera* cam, int k,
                                        int max_shift, int* out);

/* ---------------------------------------------------------------------------
 * Batch operations
 * ------------------------------------------------------------------------- */

/* Renders `count` focal stacks from a scene spec into out_dir (one
 * subdirectory per stack plus a dataset index). Stack i uses seed + i.
 * camera_json_path may be NULL for the default camera; psf is one of
 * "gaussian", "disc", "hexagon". jobs <= 0 defers to AFBENCH_JOBS, then 1. */
afb_status afb_simulate(const char* scene_json_path, const char* camera_json_path,
                        const char* out_dir, int count, uint64_t seed,
                        const char* psf, double noise_sigma, int focal_breathing,
                        int saturate, int dual_pixel, int jobs);

/* Runs comma-separated algorithm ids over a dataset under one protocol
 * ("focal_stack", "single_slice", "multi_step" with `steps`) and writes one
 * CSV row per algorithm. scorer_path is required by the "scorer" id.
 * registration is NULL, "calibrated", or "grid_search". */
afb_status afb_evaluate(const char* dataset_dir, const char* algorithms,
                        const char* protocol, int steps, const char* scorer_path,
                        const char* registration, int max_shift, int jobs,
                        const char* out_csv);

/* Trains the shallow scorer on a dataset and saves it as JSON.
 * config_json_path may be NULL for defaults; mode is NULL, "full_stack", or
 * "single_slice" and overrides the config file. */
afb_status afb_train(const char* dataset_dir, const char* config_json_path,
                     const char* mode, int jobs, const char* out_scorer_path);

/* Merges rows from the given report CSVs into one ranked table ("markdown" or
 * "csv"). *out_text must be released with afb_string_free. */
afb_status afb_report(const char* const* csv_paths, size_t n_paths,
                      const char* format, char** out_text);

/* Comma-separated algorithm ids: family is "contrast", "dp", or "all".
 * *out_text must be released with afb_string_free. */
afb_status afb_algorithm_ids(const char* family, char** out_text);

void afb_string_free(char* text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AFBENCH_H */

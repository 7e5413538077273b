#ifndef FRONTIER_MERGE_H
#define FRONTIER_MERGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Storage type of a tensor.
 */
typedef enum FmDtype {
  FM_DTYPE_F32 = 0,
  FM_DTYPE_F16 = 1,
  FM_DTYPE_BF16 = 2,
  FM_DTYPE_F64 = 3,
  FM_DTYPE_I64 = 4,
  FM_DTYPE_I32 = 5,
  FM_DTYPE_I16 = 6,
  FM_DTYPE_I8 = 7,
  FM_DTYPE_U8 = 8,
  FM_DTYPE_BOOL = 9,
} FmDtype;

/**
 * Result of every fallible call. Values are stable across releases.
 */
typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_UTF8 = 2,
  FM_STATUS_BUFFER_TOO_SMALL = 3,
  FM_STATUS_IO = 10,
  FM_STATUS_MALFORMED_HEADER = 11,
  FM_STATUS_UNKNOWN_TENSOR = 12,
  FM_STATUS_DUPLICATE_TENSOR = 13,
  FM_STATUS_UNSUPPORTED_DTYPE = 14,
  FM_STATUS_SHAPE_MISMATCH = 15,
  FM_STATUS_DTYPE_MISMATCH = 16,
  FM_STATUS_TENSOR_SET_MISMATCH = 17,
  FM_STATUS_INVALID_RECIPE = 20,
  FM_STATUS_EMPTY_INPUT = 30,
  FM_STATUS_MIXED_TASKS = 31,
  FM_STATUS_INVALID_CONFIDENCE = 32,
  FM_STATUS_MALFORMED_LINE = 33,
  FM_STATUS_CONFIDENCE_OUT_OF_RANGE = 34,
  FM_STATUS_MALFORMED_ROW = 35,
  FM_STATUS_DUPLICATE_KEY = 36,
  FM_STATUS_INCONSISTENT_BUNDLE = 37,
  FM_STATUS_MISSING_TASK = 40,
  FM_STATUS_MISSING_PARENTS = 41,
  FM_STATUS_TOO_FEW_POINTS = 42,
  FM_STATUS_INVALID_SWEEP = 43,
  FM_STATUS_SWEEP_FAILED = 44,
  FM_STATUS_INVALID_ARGUMENT = 50,
  FM_STATUS_SERIALIZATION = 51,
  FM_STATUS_PANIC = 99,
} FmStatus;

/**
 * Opaque checkpoint handle.
 */
typedef struct FmCheckpoint FmCheckpoint;

/**
 * Opaque merge recipe handle.
 */
typedef struct FmRecipe FmRecipe;

typedef struct FmTensorInfo {
  enum FmDtype dtype;
  size_t ndim;
  size_t numel;
  uint64_t byte_len;
} FmTensorInfo;

typedef struct FmCalibration {
  size_t n;
  /**
   * Fraction correct in [0, 1].
   */
  double accuracy;
  double mean_confidence;
  double ece;
} FmCalibration;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, e.g. "0.1.0". Static storage.
 */
const char *fm_version(void);

/**
 * Stable token for a status code ("MALFORMED_HEADER", ...), or NULL for an
 * unknown code. Static storage.
 */
const char *fm_status_name(int code);

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * Valid until the next call into the library on this thread.
 */
const char *fm_last_error_message(void);

/**
 * Open a safetensors file (or a shard index `.json`).
 */
enum FmStatus fm_checkpoint_open(const char *path, struct FmCheckpoint **out);

void fm_checkpoint_free(struct FmCheckpoint *handle);

/**
 * Number of tensors; 0 for a NULL handle.
 */
size_t fm_checkpoint_tensor_count(const struct FmCheckpoint *handle);

/**
 * Name of tensor `index`; the string lives as long as the handle.
 */
enum FmStatus fm_checkpoint_tensor_name(const struct FmCheckpoint *handle,
                                        size_t index,
                                        const char **out);

enum FmStatus fm_checkpoint_tensor_info(const struct FmCheckpoint *handle,
                                        size_t index,
                                        struct FmTensorInfo *out);

/**
 * Copy the shape of tensor `index` into `dims` (capacity `cap`). `ndim` always
 * receives the rank; BUFFER_TOO_SMALL when `cap` is below it.
 */
enum FmStatus fm_checkpoint_tensor_shape(const struct FmCheckpoint *handle,
                                         size_t index,
                                         size_t *dims,
                                         size_t cap,
                                         size_t *ndim);

/**
 * Decode tensor `name` to F32 into `out`; `len` must equal its element count.
 */
enum FmStatus fm_checkpoint_load_f32(const struct FmCheckpoint *handle,
                                     const char *name,
                                     float *out,
                                     size_t len);

/**
 * Parse and validate a JSON recipe.
 */
enum FmStatus fm_recipe_from_json(const char *json, struct FmRecipe **out);

void fm_recipe_free(struct FmRecipe *handle);

/**
 * Change the recipe's lambda; the recipe is left untouched if the new value
 * is invalid for its method.
 */
enum FmStatus fm_recipe_set_lambda(struct FmRecipe *handle, double lambda);

/**
 * Hex SHA-256 of the canonical recipe JSON, NUL-terminated; `cap` >= 65.
 */
enum FmStatus fm_recipe_provenance_hash(const struct FmRecipe *handle, char *buf, size_t cap);

/**
 * Stream-merge `pt` and `it` into a new safetensors file at `out_path`.
 */
enum FmStatus fm_merge(const struct FmCheckpoint *pt,
                       const struct FmCheckpoint *it,
                       const struct FmRecipe *recipe,
                       const char *out_path);

/**
 * Add `lambda * (it - pt)` (sparsified for dare-ties) to `base`.
 */
enum FmStatus fm_merge_onto_base(const struct FmCheckpoint *base,
                                 const struct FmCheckpoint *pt,
                                 const struct FmCheckpoint *it,
                                 const struct FmRecipe *recipe,
                                 const char *out_path);

/**
 * `out = (1 - lambda) * a + lambda * b`, elementwise over `n` values.
 */
enum FmStatus fm_merge_linear(const float *a, const float *b, size_t n, double lambda, float *out);

/**
 * Spherical interpolation of two `n`-vectors, linear below `eps`.
 */
enum FmStatus fm_merge_slerp(const float *a,
                             const float *b,
                             size_t n,
                             double lambda,
                             double eps,
                             float *out);

/**
 * `out = base + lambda * delta`.
 */
enum FmStatus fm_task_arithmetic(const float *base,
                                 const float *delta,
                                 size_t n,
                                 double lambda,
                                 float *out);

/**
 * DARE drop-and-rescale of `delta`, keyed by (`seed`, `name`, element index).
 */
enum FmStatus fm_dare_drop_rescale(const float *delta,
                                   size_t n,
                                   double density,
                                   uint64_t seed,
                                   const char *name,
                                   float *out);

/**
 * Zero the `floor(fraction * n)` smallest-magnitude entries of `delta`.
 */
enum FmStatus fm_ties_trim(const float *delta, size_t n, double fraction, float *out);

/**
 * F32 to BF16 bits, round to nearest even.
 */
uint16_t fm_f32_to_bf16(float value);

float fm_bf16_to_f32(uint16_t bits);

/**
 * F32 to IEEE half bits, round to nearest even, overflow to infinity.
 */
uint16_t fm_f32_to_f16(float value);

float fm_f16_to_f32(uint16_t bits);

/**
 * ECE over `n` (confidence, correct) pairs with `bins` equal-width bins.
 * `correct` entries are 0 or nonzero.
 */
enum FmStatus fm_compute_ece(const double *confidence,
                             const uint8_t *correct,
                             size_t n,
                             size_t bins,
                             struct FmCalibration *out);

/**
 * Mark each of `n` (accuracy, ece) points: 1 when no other point dominates it.
 */
enum FmStatus fm_pareto_frontier(const double *accuracy,
                                 const double *ece,
                                 size_t n,
                                 uint8_t *on_frontier);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRONTIER_MERGE_H */

#ifndef BACYCLE_H
#define BACYCLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BacEstimator {
  BAC_ESTIMATOR_CYCLE = 0,
  BAC_ESTIMATOR_PREV = 1,
} BacEstimator;

typedef enum BacLoss {
  BAC_LOSS_L1 = 0,
  BAC_LOSS_L2 = 1,
} BacLoss;

typedef enum BacStatus {
  BAC_STATUS_OK = 0,
  BAC_STATUS_NULL_POINTER = 1,
  BAC_STATUS_INVALID_UTF8 = 2,
  BAC_STATUS_PARSE = 3,
  BAC_STATUS_INVALID_ARGUMENT = 4,
  BAC_STATUS_IO = 5,
  BAC_STATUS_MISSING_TABLE = 6,
  BAC_STATUS_SCORING = 7,
  BAC_STATUS_PANIC = 8,
} BacStatus;

/**
 * Builtin or archive-backed scorer.
 */
typedef struct BacScorer BacScorer;

/**
 * Parsed multi-chain backbone.
 */
typedef struct BacStructure BacStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *bac_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *bac_last_error_message(void);

/**
 * Parses PDB text; `id` names the model in fingerprints.
 *
 * # Safety
 * `text` and `id` must be NUL-terminated strings; `out` must be writable.
 */
enum BacStatus bac_structure_parse_pdb(const char *text, const char *id, struct BacStructure **out);

/**
 * Reads a PDB file; the model id is the file stem.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BacStatus bac_structure_read_pdb(const char *path, struct BacStructure **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards; NULL is ignored.
 */
void bac_structure_free(struct BacStructure *s);

/**
 * # Safety
 * `s` must be a live structure handle; `out` must be writable.
 */
enum BacStatus bac_structure_residue_count(const struct BacStructure *s, size_t *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum BacStatus bac_scorer_builtin(struct BacScorer **out);

/**
 * Loads a JSONL log-probability archive.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BacStatus bac_scorer_load_archive(const char *path, struct BacScorer **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards; NULL is ignored.
 */
void bac_scorer_free(struct BacScorer *s);

/**
 * ΔΔG for `mutations` (e.g. `"TI38I,KB12E"`) with partners `group_a` /
 * `group_b` (chain letters). `orders` decoding orders are averaged, seeded by
 * `seed`; 1 means the canonical order. Writes the raw log-ratio to `out_r`
 * and `-kt * r + bias` to `out_ddg`.
 *
 * # Safety
 * Handles must be live; strings NUL-terminated; outputs writable.
 */
enum BacStatus bac_ddg(const struct BacStructure *structure,
                       const struct BacScorer *scorer,
                       const char *group_a,
                       const char *group_b,
                       const char *mutations,
                       enum BacEstimator estimator,
                       uint32_t orders,
                       uint64_t seed,
                       double kt,
                       double bias,
                       double *out_r,
                       double *out_ddg);

/**
 * Approximate ΔG of the native complex over all residues, or only interface
 * residues when `interface_only` is set.
 *
 * # Safety
 * Handles must be live; strings NUL-terminated; outputs writable.
 */
enum BacStatus bac_dg(const struct BacStructure *structure,
                      const struct BacScorer *scorer,
                      const char *group_a,
                      const char *group_b,
                      bool interface_only,
                      uint32_t orders,
                      uint64_t seed,
                      double kt,
                      double bias,
                      double *out_r,
                      double *out_dg);

/**
 * CA RMSD after optimal superposition of two models with equal composition.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum BacStatus bac_kabsch_rmsd(const struct BacStructure *pred,
                               const struct BacStructure *reference,
                               double *out);

/**
 * Bradley–Terry probability that the mutant is preferred.
 */
double bac_preference_probability(double loglik_wt, double loglik_mut);

/**
 * Fits `label ≈ -kt * r + bias` over `n` pairs.
 *
 * # Safety
 * `r` and `labels` must point to `n` readable doubles; outputs writable.
 */
enum BacStatus bac_fit_calibration(const double *r,
                                   const double *labels,
                                   size_t n,
                                   enum BacLoss loss,
                                   double *out_kt,
                                   double *out_bias);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BACYCLE_H */

/* Copyright 2026 The Sievebank Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Shared-library C API for the selective joint fine-tuning sample-selection
 * pipeline: filter-bank descriptors, target-calibrated histograms, weighted
 * symmetric-KL retrieval, hard-sample iteration, and batch scheduling.
 *
 * Every object is an opaque handle created by a sjft_*_open/build call and
 * released with the matching *_close. Functions return SJFT_OK or an error
 * code; sjft_last_error() describes the most recent failure on the calling
 * thread. Handles are not thread-safe; distinct handles may be used from
 * distinct threads freely.
 */

#ifndef SIEVEBANK_SIEVEBANK_H_
#define SIEVEBANK_SIEVEBANK_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sjft_status {
  SJFT_OK = 0,
  SJFT_ERR_IO = 1,
  SJFT_ERR_PARSE = 2,
  SJFT_ERR_INVALID_ARGUMENT = 3,
  SJFT_ERR_VALIDATION = 4,
  SJFT_ERR_NUMERIC = 5,
  SJFT_ERR_INTERNAL = 6
} sjft_status;

typedef enum sjft_domain {
  SJFT_DOMAIN_SOURCE = 0,
  SJFT_DOMAIN_TARGET = 1
} sjft_domain;

const char* sjft_status_name(sjft_status status);

/* Message for the last failure on this thread; empty string if none. */
const char* sjft_last_error(void);

/* ---- corpus ---------------------------------------------------------- */

typedef struct sjft_manifest sjft_manifest;

sjft_status sjft_manifest_open(const char* path, sjft_manifest** out);
void sjft_manifest_close(sjft_manifest* manifest);
int64_t sjft_manifest_count(const sjft_manifest* manifest, sjft_domain domain);
int sjft_manifest_classes(const sjft_manifest* manifest, sjft_domain domain);

/* ---- filter bank ------------------------------------------------------ */

typedef struct sjft_bank sjft_bank;

sjft_status sjft_bank_build_gabor(int scales, int orientations,
                                  int kernel_size, sjft_bank** out);
sjft_status sjft_bank_open(const char* path, sjft_bank** out);
sjft_status sjft_bank_save(const sjft_bank* bank, const char* path);
void sjft_bank_close(sjft_bank* bank);
int64_t sjft_bank_filter_count(const sjft_bank* bank);
int sjft_bank_layer_count(const sjft_bank* bank);
uint64_t sjft_bank_fingerprint(const sjft_bank* bank);

/* ---- descriptors ------------------------------------------------------ */

/* A cache bundles the filter bank, the calibration computed on the target
 * domain, and zero or more per-sample descriptors (SJFD file). */
typedef struct sjft_cache sjft_cache;

/* Calibrate equi-population bins on `domain` of the manifest (normally the
 * target domain). threads = 0 uses all hardware threads. */
sjft_status sjft_calibrate(const sjft_manifest* manifest, sjft_domain domain,
                           const sjft_bank* bank, uint32_t bins, int threads,
                           sjft_cache** out);

/* Descriptors for `domain` of the manifest under an existing calibration. */
sjft_status sjft_describe(const sjft_manifest* manifest, sjft_domain domain,
                          const sjft_cache* calibration, int threads,
                          sjft_cache** out);

sjft_status sjft_cache_open(const char* path, sjft_cache** out);
sjft_status sjft_cache_save(const sjft_cache* cache, const char* path);
void sjft_cache_close(sjft_cache* cache);
int64_t sjft_cache_sample_count(const sjft_cache* cache);
uint32_t sjft_cache_bins(const sjft_cache* cache);
uint64_t sjft_cache_fingerprint(const sjft_cache* cache);

/* Weighted symmetric KL distance between two samples of two caches. */
sjft_status sjft_cache_distance(const sjft_cache* a, int64_t index_a,
                                const sjft_cache* b, int64_t index_b,
                                double* out);

/* ---- retrieval -------------------------------------------------------- */

typedef struct sjft_selection sjft_selection;

sjft_status sjft_retrieve(const sjft_cache* targets, const sjft_cache* source,
                          uint32_t k0, uint64_t min_union, int threads,
                          sjft_selection** out);
sjft_status sjft_selection_open(const char* path, sjft_selection** out);
sjft_status sjft_selection_save(const sjft_selection* selection,
                                const char* path);
void sjft_selection_close(sjft_selection* selection);
int64_t sjft_selection_union_size(const sjft_selection* selection);
double sjft_selection_overlap_ratio(const sjft_selection* selection);
/* 1 when the union is smaller than the configured minimum. */
int sjft_selection_under_coverage(const sjft_selection* selection);

/* ---- batch schedule ---------------------------------------------------- */

typedef struct sjft_schedule sjft_schedule;

sjft_status sjft_schedule_build(const sjft_selection* selection,
                                uint32_t batch_size, uint32_t epochs,
                                uint64_t seed, sjft_schedule** out);
sjft_status sjft_schedule_save(const sjft_schedule* schedule, const char* path);
void sjft_schedule_close(sjft_schedule* schedule);
int64_t sjft_schedule_batch_count(const sjft_schedule* schedule);

/* ---- configuration and pipeline runs ----------------------------------- */

typedef struct sjft_config sjft_config;

/* Full-scale defaults. */
sjft_status sjft_config_create(sjft_config** out);
/* Demo-scale defaults (small synthetic corpus, compact bank). */
sjft_status sjft_config_create_demo(sjft_config** out);
/* Merge a sectioned key-value file onto the handle's current values. */
sjft_status sjft_config_merge_file(sjft_config* config, const char* path);
/* Set one `section.key`, e.g. ("retrieval.k0", "100"). */
sjft_status sjft_config_set(sjft_config* config, const char* key,
                            const char* value);
/* SJFT_ERR_VALIDATION with every violated constraint (newline-separated)
 * in sjft_last_error() when invalid. */
sjft_status sjft_config_validate(const sjft_config* config);
void sjft_config_close(sjft_config* config);

/* Generate the synthetic texture corpus described by [synthetic]. */
sjft_status sjft_run_gen_synthetic(const sjft_config* config,
                                   const char* out_dir);
/* End-to-end synthetic demo into paths.out_dir; ablate != 0 adds the
 * random/all/no-iteration/no-source/loaded-bank comparison runs. */
sjft_status sjft_run_demo(const sjft_config* config, int ablate);
/* Hard-sample loop over corpora/caches named in the config. */
sjft_status sjft_run_iterate(const sjft_config* config);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SIEVEBANK_SIEVEBANK_H_ */

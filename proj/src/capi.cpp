// Copyright 2026 The Sievebank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sievebank/sievebank.h"

#include <string>

#include "config.hpp"
#include "pipeline.hpp"

using namespace sievebank;

namespace {

thread_local std::string g_last_error;

sjft_status to_status(Status s) { return static_cast<sjft_status>(s); }

template <typename Fn>
sjft_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SJFT_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.status());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SJFT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SJFT_ERR_INTERNAL;
  }
}

sjft_status invalid(const char* message) {
  g_last_error = message;
  return SJFT_ERR_INVALID_ARGUMENT;
}

Domain to_domain(sjft_domain d) {
  return d == SJFT_DOMAIN_TARGET ? Domain::Target : Domain::Source;
}

}  // namespace

struct sjft_manifest {
  Manifest manifest;
};
struct sjft_bank {
  FilterBank bank;
};
struct sjft_cache {
  DescriptorCache cache;
};
struct sjft_selection {
  SelectionResult selection;
};
struct sjft_schedule {
  BatchSchedule schedule;
};
struct sjft_config {
  PipelineConfig config;
};

extern "C" {

const char* sjft_status_name(sjft_status status) {
  switch (status) {
    case SJFT_OK: return "ok";
    case SJFT_ERR_IO: return "io";
    case SJFT_ERR_PARSE: return "parse";
    case SJFT_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SJFT_ERR_VALIDATION: return "validation";
    case SJFT_ERR_NUMERIC: return "numeric";
    case SJFT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sjft_last_error(void) { return g_last_error.c_str(); }

/* ---- corpus ---------------------------------------------------------- */

sjft_status sjft_manifest_open(const char* path, sjft_manifest** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new sjft_manifest{load_manifest(path)}; });
}

void sjft_manifest_close(sjft_manifest* manifest) { delete manifest; }

int64_t sjft_manifest_count(const sjft_manifest* manifest, sjft_domain domain) {
  if (!manifest) return -1;
  return static_cast<int64_t>(manifest->manifest.domain_size(to_domain(domain)));
}

int sjft_manifest_classes(const sjft_manifest* manifest, sjft_domain domain) {
  if (!manifest) return -1;
  return manifest->manifest.class_count(to_domain(domain));
}

/* ---- filter bank ------------------------------------------------------ */

sjft_status sjft_bank_build_gabor(int scales, int orientations,
                                  int kernel_size, sjft_bank** out) {
  if (!out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sjft_bank{build_gabor_bank(scales, orientations, kernel_size)};
  });
}

sjft_status sjft_bank_open(const char* path, sjft_bank** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new sjft_bank{load_kernel_bank(path)}; });
}

sjft_status sjft_bank_save(const sjft_bank* bank, const char* path) {
  if (!bank || !path) return invalid("null argument");
  return guarded([&] { save_kernel_bank(bank->bank, path); });
}

void sjft_bank_close(sjft_bank* bank) { delete bank; }

int64_t sjft_bank_filter_count(const sjft_bank* bank) {
  return bank ? static_cast<int64_t>(bank->bank.filter_count()) : -1;
}

int sjft_bank_layer_count(const sjft_bank* bank) {
  return bank ? static_cast<int>(bank->bank.layers.size()) : -1;
}

uint64_t sjft_bank_fingerprint(const sjft_bank* bank) {
  return bank ? bank->bank.fingerprint() : 0;
}

/* ---- descriptors ------------------------------------------------------ */

sjft_status sjft_calibrate(const sjft_manifest* manifest, sjft_domain domain,
                           const sjft_bank* bank, uint32_t bins, int threads,
                           sjft_cache** out) {
  if (!manifest || !bank || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    Corpus corpus =
        load_domain(manifest->manifest, to_domain(domain), threads,
                    bank->bank.max_kernel_height(),
                    bank->bank.max_kernel_width());
    Calibration cal = calibrate(corpus, bank->bank, bins, threads);
    *out = new sjft_cache{
        DescriptorCache{bank->bank, {to_domain(domain), std::move(cal), {}}}};
  });
}

sjft_status sjft_describe(const sjft_manifest* manifest, sjft_domain domain,
                          const sjft_cache* calibration, int threads,
                          sjft_cache** out) {
  if (!manifest || !calibration || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    const FilterBank& bank = calibration->cache.bank;
    Corpus corpus = load_domain(manifest->manifest, to_domain(domain), threads,
                                bank.max_kernel_height(),
                                bank.max_kernel_width());
    DescriptorTable table =
        build_table(corpus, bank, calibration->cache.table.cal, threads);
    *out = new sjft_cache{DescriptorCache{bank, std::move(table)}};
  });
}

sjft_status sjft_cache_open(const char* path, sjft_cache** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new sjft_cache{load_cache(path)}; });
}

sjft_status sjft_cache_save(const sjft_cache* cache, const char* path) {
  if (!cache || !path) return invalid("null argument");
  return guarded([&] { save_cache(cache->cache, path); });
}

void sjft_cache_close(sjft_cache* cache) { delete cache; }

int64_t sjft_cache_sample_count(const sjft_cache* cache) {
  return cache ? static_cast<int64_t>(cache->cache.table.size()) : -1;
}

uint32_t sjft_cache_bins(const sjft_cache* cache) {
  return cache ? cache->cache.table.cal.bins : 0;
}

uint64_t sjft_cache_fingerprint(const sjft_cache* cache) {
  return cache ? cache->cache.table.cal.bank_fingerprint : 0;
}

sjft_status sjft_cache_distance(const sjft_cache* a, int64_t index_a,
                                const sjft_cache* b, int64_t index_b,
                                double* out) {
  if (!a || !b || !out) return invalid("null argument");
  return guarded([&] {
    if (index_a < 0 ||
        index_a >= static_cast<int64_t>(a->cache.table.size()) ||
        index_b < 0 || index_b >= static_cast<int64_t>(b->cache.table.size()))
      throw InvalidArgumentError("sample index out of range");
    *out = distance(a->cache.table.descriptors[static_cast<size_t>(index_a)],
                    b->cache.table.descriptors[static_cast<size_t>(index_b)],
                    a->cache.table.cal);
  });
}

/* ---- retrieval -------------------------------------------------------- */

sjft_status sjft_retrieve(const sjft_cache* targets, const sjft_cache* source,
                          uint32_t k0, uint64_t min_union, int threads,
                          sjft_selection** out) {
  if (!targets || !source || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<uint32_t> ks(targets->cache.table.size(), k0);
    *out = new sjft_selection{select(targets->cache.table, source->cache.table,
                                     ks, min_union, threads)};
  });
}

sjft_status sjft_selection_open(const char* path, sjft_selection** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new sjft_selection{load_selection(path)}; });
}

sjft_status sjft_selection_save(const sjft_selection* selection,
                                const char* path) {
  if (!selection || !path) return invalid("null argument");
  return guarded([&] { save_selection(selection->selection, path); });
}

void sjft_selection_close(sjft_selection* selection) { delete selection; }

int64_t sjft_selection_union_size(const sjft_selection* selection) {
  return selection ? static_cast<int64_t>(selection->selection.union_size())
                   : -1;
}

double sjft_selection_overlap_ratio(const sjft_selection* selection) {
  return selection ? selection->selection.overlap_ratio : -1.0;
}

int sjft_selection_under_coverage(const sjft_selection* selection) {
  return selection ? (selection->selection.under_coverage ? 1 : 0) : -1;
}

/* ---- batch schedule ---------------------------------------------------- */

sjft_status sjft_schedule_build(const sjft_selection* selection,
                                uint32_t batch_size, uint32_t epochs,
                                uint64_t seed, sjft_schedule** out) {
  if (!selection || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new sjft_schedule{
        build_schedule(selection->selection, batch_size, epochs, seed)};
  });
}

sjft_status sjft_schedule_save(const sjft_schedule* schedule,
                               const char* path) {
  if (!schedule || !path) return invalid("null argument");
  return guarded([&] { save_schedule(schedule->schedule, path); });
}

void sjft_schedule_close(sjft_schedule* schedule) { delete schedule; }

int64_t sjft_schedule_batch_count(const sjft_schedule* schedule) {
  return schedule ? static_cast<int64_t>(schedule->schedule.batches.size())
                  : -1;
}

/* ---- configuration and pipeline runs ----------------------------------- */

sjft_status sjft_config_create(sjft_config** out) {
  if (!out) return invalid("null argument");
  return guarded([&] { *out = new sjft_config{PipelineConfig{}}; });
}

sjft_status sjft_config_create_demo(sjft_config** out) {
  if (!out) return invalid("null argument");
  return guarded([&] { *out = new sjft_config{demo_default_config()}; });
}

sjft_status sjft_config_merge_file(sjft_config* config, const char* path) {
  if (!config || !path) return invalid("null argument");
  return guarded([&] { merge_config_file(config->config, path); });
}

sjft_status sjft_config_set(sjft_config* config, const char* key,
                            const char* value) {
  if (!config || !key || !value) return invalid("null argument");
  return guarded([&] { apply_override(config->config, key, value); });
}

sjft_status sjft_config_validate(const sjft_config* config) {
  if (!config) return invalid("null argument");
  std::vector<std::string> errors = validate_config(config->config);
  if (errors.empty()) {
    g_last_error.clear();
    return SJFT_OK;
  }
  std::string joined;
  for (const auto& e : errors) {
    if (!joined.empty()) joined += '\n';
    joined += e;
  }
  g_last_error = joined;
  return SJFT_ERR_VALIDATION;
}

void sjft_config_close(sjft_config* config) { delete config; }

sjft_status sjft_run_gen_synthetic(const sjft_config* config,
                                   const char* out_dir) {
  if (!config || !out_dir) return invalid("null argument");
  return guarded([&] { run_gen_synthetic(config->config, out_dir); });
}

sjft_status sjft_run_demo(const sjft_config* config, int ablate) {
  if (!config) return invalid("null argument");
  return guarded([&] { run_demo(config->config, ablate != 0); });
}

sjft_status sjft_run_iterate(const sjft_config* config) {
  if (!config) return invalid("null argument");
  return guarded([&] { run_iterate(config->config); });
}

}  // extern "C"

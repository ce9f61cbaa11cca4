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

#ifndef SIEVEBANK_CONFIG_HPP_
#define SIEVEBANK_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "synthetic.hpp"

namespace sievebank {

// Declarative pipeline configuration: a sectioned key-value file plus
// `section.key` overrides (overrides win). All stage constants live here so
// a run is reproducible from its config and seed.
struct PipelineConfig {
  // [paths]
  std::string source_manifest;
  std::string target_manifest;
  std::string target_test_manifest;
  std::string target_desc;  // optional precomputed caches for `iterate`
  std::string source_desc;
  std::string bank = "gabor";  // "gabor" or an SJFB path
  std::string out_dir;

  // [gabor]
  int gabor_scales = 4;
  int gabor_orientations = 6;
  int gabor_kernel_size = 31;

  // [descriptor]
  uint32_t bins = 16;

  // [retrieval]
  uint32_t k0 = 100;
  uint64_t min_union = 200000;

  // [loop]
  double delta = 0.1;
  uint32_t sigma0 = 0;  // 0 = 4 * k0
  uint32_t sigma1 = 0;  // 0 = 2 * k0
  int max_iterations = 5;

  // [trainer]
  int feature_width = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double lambda = 1.0;
  double init_scale = 0.01;
  uint32_t batch = 10;
  uint32_t epochs_per_iteration = 20;

  // [synthetic] (used by demo / gen-synthetic)
  SyntheticSpec synthetic;

  // [global]
  uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

PipelineConfig load_config(const std::filesystem::path& path);

// key is `section.key`, e.g. "retrieval.k0". Unknown keys throw.
void apply_override(PipelineConfig& config, const std::string& key,
                    const std::string& value);

// Returns every violated constraint, not just the first.
std::vector<std::string> validate_config(const PipelineConfig& config);

void save_config(const PipelineConfig& config,
                 const std::filesystem::path& path);

}  // namespace sievebank

#endif  // SIEVEBANK_CONFIG_HPP_

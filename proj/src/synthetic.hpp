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

#ifndef SIEVEBANK_SYNTHETIC_HPP_
#define SIEVEBANK_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>

#include "corpus.hpp"
#include "filterbank.hpp"

namespace sievebank {

// Oriented-sinusoid-plus-noise texture corpus. Each family is a texture
// process with a fixed orientation; images within a family share the family
// parameters up to noise-scaled jitter plus an always-random phase. Source
// family orientations are evenly spaced over [0, pi); each target family
// sits at the midpoint between two adjacent source families, so its
// parameter neighbors are exactly those two.
struct SyntheticSpec {
  uint32_t source_families = 4;
  uint32_t source_per_family = 50;
  uint32_t target_families = 0;  // 0 = single-domain corpus
  uint32_t target_per_family = 0;
  uint32_t target_test_per_family = 0;
  uint32_t image_size = 32;
  double noise = 0.25;
  uint64_t seed = 0;
};

struct SyntheticPaths {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> test_manifest;
};

SyntheticPaths generate_corpus(const SyntheticSpec& spec,
                               const std::filesystem::path& out_dir);

double source_family_orientation(uint32_t family, uint32_t n_source);
double target_family_orientation(uint32_t family, uint32_t n_target,
                                 uint32_t n_source);
// The two source families flanking a target family in parameter space.
std::pair<uint32_t, uint32_t> target_neighbor_families(uint32_t family,
                                                       uint32_t n_target,
                                                       uint32_t n_source);

// One rendered texture (for tests and in-memory use).
LabeledImage render_texture(uint32_t size, double orientation, double frequency,
                            double noise, uint64_t image_seed);

// Stand-in for a bank loaded from a pretrained network: two layers of
// smoothed random kernels with rectification, DC-removed and normalized.
FilterBank build_synthetic_learned_bank(uint64_t seed);

}  // namespace sievebank

#endif  // SIEVEBANK_SYNTHETIC_HPP_

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

#ifndef SIEVEBANK_BATCHER_HPP_
#define SIEVEBANK_BATCHER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "common.hpp"
#include "retrieval.hpp"

namespace sievebank {

struct BatchEntry {
  Domain domain = Domain::Target;
  uint32_t sample_index = 0;
  // For target entries: the source neighbor placed in the same mini-batch.
  std::optional<uint32_t> paired_index;
};

// Deterministic function of (seed, selection, batch size, epochs). Each
// epoch is a seeded permutation of the targets chunked into groups of b
// (remainder dropped); each target is paired with a neighbor drawn
// uniformly from its NeighborSet, resampled every epoch.
struct BatchSchedule {
  uint32_t batch_size = 0;  // b; joint batches hold 2b entries
  uint32_t epochs = 0;
  uint64_t seed = 0;
  std::vector<std::vector<BatchEntry>> batches;
};

BatchSchedule build_schedule(const SelectionResult& selection,
                             uint32_t batch_size, uint32_t epochs,
                             uint64_t seed);

// Target-only variant for the no-source ablation: batches of b target
// entries, no pairing.
BatchSchedule build_target_only_schedule(size_t n_targets, uint32_t batch_size,
                                         uint32_t epochs, uint64_t seed);

// Schedule file: `<batch>\t<domain>\t<sample>\t<paired-or-dash>` per line.
void save_schedule(const BatchSchedule& schedule,
                   const std::filesystem::path& path);
BatchSchedule load_schedule(const std::filesystem::path& path);

}  // namespace sievebank

#endif  // SIEVEBANK_BATCHER_HPP_

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

#ifndef SIEVEBANK_RETRIEVAL_HPP_
#define SIEVEBANK_RETRIEVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "descriptor.hpp"

namespace sievebank {

// Layer-weighted symmetric KL distance:
//   sum_h (1/N_h) sum_{i in layer h} [KL(a_i || b_i) + KL(b_i || a_i)]
// with natural logarithms. Computed in the factored form
// sum_b (p_b - q_b)(ln p_b - ln q_b), which is term-for-term symmetric and
// exactly zero on identical histograms.
double distance(const Descriptor& a, const Descriptor& b,
                const Calibration& cal);

struct Neighbor {
  uint32_t source_index = 0;
  double distance = 0.0;
};

struct NeighborSet {
  uint32_t target_index = 0;
  uint32_t requested_k = 0;
  std::vector<Neighbor> neighbors;  // ascending distance, ties by id
};

// Exact top-K scan of the source table. Ties break by ascending source id;
// the result is independent of the thread count.
NeighborSet top_k(const Descriptor& target, const DescriptorTable& source,
                  uint32_t k, int threads);

struct SelectionResult {
  std::vector<NeighborSet> per_target;
  std::vector<uint32_t> union_ids;  // sorted, deduplicated source indices
  size_t total_retrieved = 0;
  double overlap_ratio = 0.0;  // 1 - union / total
  uint64_t min_union = 0;
  bool under_coverage = false;  // union smaller than min_union

  size_t union_size() const { return union_ids.size(); }
};

// k_per_target[i] is the neighbor count for target sample i. If the union
// falls short of min_union the result carries a warning flag; the selection
// itself is still returned so the caller can raise K0.
SelectionResult select(const DescriptorTable& targets,
                       const DescriptorTable& source,
                       const std::vector<uint32_t>& k_per_target,
                       uint64_t min_union, int threads);

// Neighbor-list text file: `<target>\t<rank>\t<source>\t<distance>` with
// 1-based ranks and 9-significant-digit distances.
void save_selection(const SelectionResult& selection,
                    const std::filesystem::path& path);
SelectionResult load_selection(const std::filesystem::path& path,
                               uint64_t min_union = 0);

}  // namespace sievebank

#endif  // SIEVEBANK_RETRIEVAL_HPP_

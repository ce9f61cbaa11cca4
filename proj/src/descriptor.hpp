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

#ifndef SIEVEBANK_DESCRIPTOR_HPP_
#define SIEVEBANK_DESCRIPTOR_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "corpus.hpp"
#include "filterbank.hpp"

namespace sievebank {

// Mixed into every histogram bin so KL-divergence stays finite:
// phi = kEpsilonFloor + (1 - B * kEpsilonFloor) * (count / pixels).
constexpr double kEpsilonFloor = 1e-6;

// Equi-population bin edges for one filter, calibrated on the pooled
// target-domain responses. `degenerate` marks a constant-response filter;
// its histogram collapses to bin 0.
struct FilterCalibration {
  double lower = 0.0;
  double upper = 0.0;
  bool degenerate = false;
  std::vector<double> edges;  // B-1 sorted interior edges
};

struct Calibration {
  uint64_t bank_fingerprint = 0;
  uint32_t bins = 0;
  std::vector<uint32_t> layer_counts;  // N_h per layer, in bank order
  std::vector<FilterCalibration> filters;

  size_t filter_count() const { return filters.size(); }
  bool same_layout(const Calibration& other) const;
};

// Exact pooled order statistics: the pool is buffered, sorted once, and the
// k-th interior edge is the value at rank floor(k*n/B) (lower-rank
// tie-breaking). Deterministic for a fixed input order; memory is bounded by
// the target-domain pixel count, which is small by the problem's premise.
FilterCalibration calibrate_pool(std::vector<double> pool, uint32_t bins);

// Bin index in [0, bins): the number of interior edges <= value. Values
// below the lower bound land in bin 0, above the upper bound in bin B-1.
uint32_t bin_of(const FilterCalibration& fc, uint32_t bins, double value);

Calibration calibrate(const Corpus& targets, const FilterBank& bank,
                      uint32_t bins, int threads);

// Concatenated per-filter histograms; entries are >= the epsilon floor and
// each filter block sums to 1. log_hist caches ln(hist) for the KL search.
struct Descriptor {
  SampleId id;
  std::vector<double> hist;      // D * B
  std::vector<double> log_hist;  // ln of hist

  void rebuild_log_cache();
};

Descriptor describe(const LabeledImage& image, const FilterBank& bank,
                    const Calibration& cal);

// Dense per-domain table: descriptors[i].id.index == i.
struct DescriptorTable {
  Domain domain = Domain::Target;
  Calibration cal;
  std::vector<Descriptor> descriptors;

  size_t size() const { return descriptors.size(); }
};

DescriptorTable build_table(const Corpus& corpus, const FilterBank& bank,
                            const Calibration& cal, int threads);

// SJFD cache, little-endian:
//   "SJFD" | version u32 | bank fingerprint u64 | bank body (SJFB payload) |
//   bins u32 | filter count u32 |
//   per filter: lower f64 | upper f64 | degenerate u8 | (B-1) edges f64 |
//   domain u8 | sample count u64 |
//   per sample: domain u8 | index u32 | D*B float32 histogram
// A calibration-only file is the same format with zero samples. The bank is
// embedded so the describe stage needs nothing but this file.
struct DescriptorCache {
  FilterBank bank;
  DescriptorTable table;
};

void save_cache(const DescriptorCache& cache, const std::filesystem::path& path);
DescriptorCache load_cache(const std::filesystem::path& path);

}  // namespace sievebank

#endif  // SIEVEBANK_DESCRIPTOR_HPP_

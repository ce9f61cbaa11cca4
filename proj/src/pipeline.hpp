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

#ifndef SIEVEBANK_PIPELINE_HPP_
#define SIEVEBANK_PIPELINE_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "hardloop.hpp"
#include "surrogate.hpp"

namespace sievebank {

// Training-source policies compared by the ablation runs.
enum class RunMode {
  Selective,     // full pipeline with Eq.-style hard-sample growth
  RandomSource,  // K0 random source images per target, fixed
  AllSource,     // every source image available to every target
  NoIteration,   // selective retrieval at K0, no growth
  NoSource,      // target-only training
  LoadedBank,    // selective, but with a bank loaded from file
};

const char* mode_name(RunMode mode);

// Everything a run needs, independent of where the corpora came from.
struct PreparedData {
  FilterBank bank;
  DescriptorTable target_table;
  DescriptorTable source_table;
  std::optional<DescriptorTable> test_table;
  std::vector<int> target_labels;
  std::vector<int> source_labels;
  std::vector<int> test_labels;
  int target_classes = 0;
  int source_classes = 0;

  LoopData loop_data() const;
};

struct ModeSummary {
  std::string mode;
  LoopReport report;
  std::vector<double> test_accuracy;  // per iteration; empty without test set
  double final_train_accuracy = 0.0;
  double final_test_accuracy = -1.0;
  double generalization_gap = 0.0;  // train - test
};

// Demo-scale defaults: a small two-domain texture corpus and a compact
// Gabor bank that runs in seconds on one core.
PipelineConfig demo_default_config();
void merge_config_file(PipelineConfig& config,
                       const std::filesystem::path& path);

// Builds corpora/caches for a config whose manifests already exist. All
// descriptor tables round-trip through SJFD files in artifacts_dir so a run
// consumes exactly what the standalone CLI stages would produce.
PreparedData prepare_from_manifests(const PipelineConfig& config,
                                    const FilterBank& bank,
                                    const std::filesystem::path& target_manifest,
                                    const std::filesystem::path& source_manifest,
                                    const std::filesystem::path& test_manifest,
                                    const std::filesystem::path& artifacts_dir);

// One policy run: max_iterations training iterations, warm-started, with
// per-iteration artifacts and a report.jsonl under run_dir.
ModeSummary run_mode(const PreparedData& data, const PipelineConfig& config,
                     RunMode mode, const std::filesystem::path& run_dir);

// End-to-end synthetic demo; with ablate, runs every policy on the same
// corpus plus a loaded-bank variant, and writes summary.json.
void run_demo(const PipelineConfig& config, bool ablate);

// The hard-sample loop on user-supplied corpora/caches named in the config.
void run_iterate(const PipelineConfig& config);

void run_gen_synthetic(const PipelineConfig& config,
                       const std::filesystem::path& out_dir);

}  // namespace sievebank

#endif  // SIEVEBANK_PIPELINE_HPP_

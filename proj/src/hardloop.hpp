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

#ifndef SIEVEBANK_HARDLOOP_HPP_
#define SIEVEBANK_HARDLOOP_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "batcher.hpp"
#include "retrieval.hpp"

namespace sievebank {

// Softmax output of the trainer for one target training sample.
struct PredictionRecord {
  uint32_t target_index = 0;
  int label = 0;       // true label
  int predicted = 0;   // argmax of probabilities
  int iteration = 0;
  std::vector<double> probabilities;
};

// Shannon entropy -sum p ln p with 0 ln 0 := 0 (natural log). Rejects
// vectors whose mass is off 1 by more than 1e-6 or with negative entries.
double entropy(const std::vector<double>& probabilities);

struct HardSampleConfig {
  uint32_t k0 = 100;
  uint32_t sigma0 = 0;  // 0 resolves to 4 * k0
  uint32_t sigma1 = 0;  // 0 resolves to 2 * k0
  double delta = 0.1;
  int max_iterations = 5;
  uint32_t k_limit = 0;  // clamp for K_i; 0 means unlimited

  uint32_t resolved_sigma0() const { return sigma0 ? sigma0 : 4 * k0; }
  uint32_t resolved_sigma1() const { return sigma1 ? sigma1 : 2 * k0; }
};

// Per-target neighbor counts across iterations. Counts never shrink.
struct HardSampleState {
  HardSampleConfig config;
  int iteration = 0;
  std::vector<uint32_t> k;  // per target index

  static HardSampleState init(size_t n_targets, const HardSampleConfig& cfg);
};

struct UpdateStats {
  size_t wrong = 0;      // mispredicted: K += sigma0
  size_t uncertain = 0;  // correct but H >= delta: K += sigma1
  size_t easy = 0;       // correct and H < delta: unchanged
};

// One application of the three-case neighbor-count update. Requires exactly
// one prediction per tracked target.
UpdateStats update_counts(HardSampleState& state,
                          const std::vector<PredictionRecord>& predictions);

// Prediction file: `<target-index>\t<label>\t<p_0>\t...\t<p_{C-1}>` per line.
void save_predictions(const std::vector<PredictionRecord>& predictions,
                      const std::filesystem::path& path);
std::vector<PredictionRecord> load_predictions(
    const std::filesystem::path& path, int iteration = 0);

// Everything a trainer needs to resolve schedule entries.
struct LoopData {
  const DescriptorTable* targets = nullptr;
  const DescriptorTable* source = nullptr;
  std::vector<int> target_labels;
  std::vector<int> source_labels;
  int target_classes = 0;
  int source_classes = 0;
};

struct TrainMetrics {
  double final_loss = 0.0;   // mean batch loss over the last epoch
  size_t batches = 0;
  double train_accuracy = 0.0;  // on the target training set
};

// Contract: successive train() calls continue from the model produced by
// the previous call (warm start); predictions are valid probability vectors
// over the target label space.
class Trainer {
 public:
  virtual ~Trainer() = default;
  virtual TrainMetrics train(const BatchSchedule& schedule,
                             const LoopData& data) = 0;
  virtual std::vector<PredictionRecord> predict_targets(
      const LoopData& data) = 0;
};

struct IterationRecord {
  int iteration = 0;
  size_t union_size = 0;
  bool under_coverage = false;
  double overlap_ratio = 0.0;
  uint32_t k_min = 0, k_max = 0;
  double k_mean = 0.0;
  UpdateStats cases;
  double mean_entropy = 0.0;
  TrainMetrics train;
};

struct LoopReport {
  std::vector<IterationRecord> iterations;
  std::vector<uint32_t> final_k;
  bool completed = false;
  std::string error;
};

struct LoopRunConfig {
  HardSampleConfig hard;
  uint32_t batch_size = 10;
  uint32_t epochs_per_iteration = 20;
  uint64_t min_union = 0;
  uint64_t seed = 0;
  int threads = 1;
};

// Called once per iteration after training, before the count update; used
// by the pipeline to materialize per-iteration artifacts.
using IterationSink = std::function<void(
    int iteration, const SelectionResult&, const BatchSchedule&,
    const std::vector<PredictionRecord>&)>;

// The full controller: select -> schedule -> train -> predict -> update,
// exactly config.hard.max_iterations times. A trainer failure aborts with a
// partial report rather than throwing.
LoopReport run_loop(const LoopData& data, Trainer& trainer,
                    const LoopRunConfig& config,
                    const IterationSink& sink = nullptr);

}  // namespace sievebank

#endif  // SIEVEBANK_HARDLOOP_HPP_

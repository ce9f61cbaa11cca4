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

#ifndef SIEVEBANK_SURROGATE_HPP_
#define SIEVEBANK_SURROGATE_HPP_

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "hardloop.hpp"

namespace sievebank {

struct SurrogateHyperparams {
  int feature_width = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double lambda_source = 1.0;  // weight of the source loss term
  double init_scale = 0.01;
  uint64_t init_seed = 0;
};

// Shared linear trunk h = W x with one softmax head per domain. Mixed
// batches flow through the trunk together; each sample contributes only to
// its own domain's loss.
struct SurrogateModel {
  Eigen::MatrixXd trunk;        // F x In
  Eigen::MatrixXd target_head;  // C_t x F
  Eigen::VectorXd target_bias;
  Eigen::MatrixXd source_head;  // C_s x F
  Eigen::VectorXd source_bias;

  int input_dim() const { return static_cast<int>(trunk.cols()); }
  int feature_width() const { return static_cast<int>(trunk.rows()); }
  int target_classes() const { return static_cast<int>(target_head.rows()); }
  int source_classes() const { return static_cast<int>(source_head.rows()); }
};

// All parameters drawn from seeded uniform noise in [-scale, scale].
SurrogateModel init_model(int input_dim, int feature_width, int target_classes,
                          int source_classes, uint64_t seed, double scale);

// One resolved mini-batch: descriptor columns and labels per domain half.
// Either half may be empty.
struct ResolvedBatch {
  Eigen::MatrixXd target_x;  // In x m_t
  std::vector<int> target_y;
  Eigen::MatrixXd source_x;  // In x m_s
  std::vector<int> source_y;
};

ResolvedBatch resolve_batch(const std::vector<BatchEntry>& batch,
                            const LoopData& data);

struct SurrogateGradients {
  Eigen::MatrixXd trunk;
  Eigen::MatrixXd target_head;
  Eigen::VectorXd target_bias;
  Eigen::MatrixXd source_head;
  Eigen::VectorXd source_bias;
};

// L = mean-CE(target half) + lambda * mean-CE(source half). Softmax uses
// max-subtraction. Absent halves contribute nothing, so a target-only batch
// has exactly zero source-head gradient.
double batch_loss(const SurrogateModel& model, const ResolvedBatch& batch,
                  double lambda);
double batch_loss_and_gradients(const SurrogateModel& model,
                                const ResolvedBatch& batch, double lambda,
                                SurrogateGradients* grads);

// SGD over the schedule: v = mu v - lr (g + wd * theta); theta += v.
// Velocity starts at zero for each call; parameters warm-start from `model`.
// Throws NumericError on a non-finite loss.
TrainMetrics train(SurrogateModel& model, const BatchSchedule& schedule,
                   const LoopData& data, const SurrogateHyperparams& hp);

std::vector<PredictionRecord> predict(const SurrogateModel& model, Domain head,
                                      const DescriptorTable& table,
                                      const std::vector<int>& labels);

// SJFM model file: "SJFM" | version u32 | In u32 | F u32 | C_t u32 |
// C_s u32 | float32 blocks (trunk, target head, target bias, source head,
// source bias), row-major.
void save_model(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_model(const std::filesystem::path& path);

// Trainer adapter for the hard-sample loop; the model persists across
// train() calls so each iteration continues fine-tuning the previous one.
class SurrogateTrainer : public Trainer {
 public:
  explicit SurrogateTrainer(const SurrogateHyperparams& hp) : hp_(hp) {}

  TrainMetrics train(const BatchSchedule& schedule,
                     const LoopData& data) override;
  std::vector<PredictionRecord> predict_targets(const LoopData& data) override;

  const SurrogateModel& model() const;
  bool has_model() const { return model_.has_value(); }

 private:
  SurrogateHyperparams hp_;
  std::optional<SurrogateModel> model_;
};

}  // namespace sievebank

#endif  // SIEVEBANK_SURROGATE_HPP_

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

#include "hardloop.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "io_util.hpp"
#include "rng.hpp"

namespace sievebank {

double entropy(const std::vector<double>& probabilities) {
  if (probabilities.empty())
    throw InvalidArgumentError("empty probability vector");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0))
      throw InvalidArgumentError("negative probability " + std::to_string(p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InvalidArgumentError("probabilities sum to " + std::to_string(sum) +
                               ", expected 1");
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log(p);
  return h < 0.0 ? 0.0 : h;
}

HardSampleState HardSampleState::init(size_t n_targets,
                                      const HardSampleConfig& cfg) {
  if (cfg.k0 < 1) throw InvalidArgumentError("K0 must be >= 1");
  if (cfg.max_iterations < 1)
    throw InvalidArgumentError("max_iterations must be >= 1");
  HardSampleState state;
  state.config = cfg;
  state.iteration = 0;
  uint32_t k0 = cfg.k0;
  if (cfg.k_limit) k0 = std::min(k0, cfg.k_limit);
  state.k.assign(n_targets, k0);
  return state;
}

UpdateStats update_counts(HardSampleState& state,
                          const std::vector<PredictionRecord>& predictions) {
  if (state.iteration >= state.config.max_iterations)
    throw InvalidArgumentError("state already at max_iterations");
  if (predictions.size() != state.k.size())
    throw InvalidArgumentError(
        "expected " + std::to_string(state.k.size()) + " predictions, got " +
        std::to_string(predictions.size()));
  std::vector<bool> seen(state.k.size(), false);
  for (const auto& p : predictions) {
    if (p.target_index >= state.k.size())
      throw InvalidArgumentError("prediction for unknown target " +
                                 std::to_string(p.target_index));
    if (seen[p.target_index])
      throw InvalidArgumentError("duplicate prediction for target " +
                                 std::to_string(p.target_index));
    seen[p.target_index] = true;
  }

  uint32_t sigma0 = state.config.resolved_sigma0();
  uint32_t sigma1 = state.config.resolved_sigma1();
  UpdateStats stats;
  for (const auto& p : predictions) {
    uint32_t& k = state.k[p.target_index];
    uint64_t next = k;
    if (p.predicted != p.label) {
      next += sigma0;
      ++stats.wrong;
    } else if (entropy(p.probabilities) >= state.config.delta) {
      next += sigma1;
      ++stats.uncertain;
    } else {
      ++stats.easy;
    }
    if (state.config.k_limit && next > state.config.k_limit)
      next = state.config.k_limit;
    k = static_cast<uint32_t>(next);
  }
  ++state.iteration;
  return stats;
}

void save_predictions(const std::vector<PredictionRecord>& predictions,
                      const std::filesystem::path& path) {
  atomic_write(path, [&](std::ostream& out) {
    for (const auto& p : predictions) {
      out << p.target_index << '\t' << p.label;
      for (double v : p.probabilities) out << '\t' << format_g9(v);
      out << '\n';
    }
  });
}

std::vector<PredictionRecord> load_predictions(
    const std::filesystem::path& path, int iteration) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<PredictionRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    PredictionRecord rec;
    rec.iteration = iteration;
    uint64_t idx;
    fields >> idx >> rec.label;
    if (fields.fail())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected `target label p...`");
    rec.target_index = static_cast<uint32_t>(idx);
    double p;
    while (fields >> p) rec.probabilities.push_back(p);
    if (rec.probabilities.size() < 2)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": need at least 2 class probabilities");
    rec.predicted = static_cast<int>(
        std::max_element(rec.probabilities.begin(), rec.probabilities.end()) -
        rec.probabilities.begin());
    out.push_back(std::move(rec));
  }
  return out;
}

LoopReport run_loop(const LoopData& data, Trainer& trainer,
                    const LoopRunConfig& config, const IterationSink& sink) {
  if (!data.targets || !data.source)
    throw InvalidArgumentError("loop data missing descriptor tables");
  size_t n_targets = data.targets->size();
  if (n_targets == 0) throw InvalidArgumentError("no target samples");
  if (data.target_labels.size() != n_targets)
    throw InvalidArgumentError("target label count mismatch");

  HardSampleConfig hard = config.hard;
  if (hard.k_limit == 0)
    hard.k_limit = static_cast<uint32_t>(data.source->size());
  HardSampleState state = HardSampleState::init(n_targets, hard);

  LoopReport report;
  for (int m = 0; m < hard.max_iterations; ++m) {
    IterationRecord rec;
    rec.iteration = m;
    {
      auto [mn, mx] = std::minmax_element(state.k.begin(), state.k.end());
      rec.k_min = *mn;
      rec.k_max = *mx;
      double sum = 0;
      for (uint32_t k : state.k) sum += k;
      rec.k_mean = sum / static_cast<double>(state.k.size());
    }

    try {
      SelectionResult selection = select(*data.targets, *data.source, state.k,
                                         config.min_union, config.threads);
      rec.union_size = selection.union_size();
      rec.under_coverage = selection.under_coverage;
      rec.overlap_ratio = selection.overlap_ratio;

      BatchSchedule schedule =
          build_schedule(selection, config.batch_size,
                         config.epochs_per_iteration,
                         mix_seed(config.seed, static_cast<uint64_t>(m)));

      rec.train = trainer.train(schedule, data);
      std::vector<PredictionRecord> predictions = trainer.predict_targets(data);
      for (auto& p : predictions) p.iteration = m;

      double h_sum = 0.0;
      for (const auto& p : predictions) h_sum += entropy(p.probabilities);
      rec.mean_entropy =
          predictions.empty() ? 0.0 : h_sum / static_cast<double>(predictions.size());

      if (sink) sink(m, selection, schedule, predictions);
      rec.cases = update_counts(state, predictions);
    } catch (const Error& e) {
      report.error = e.what();
      report.iterations.push_back(rec);
      report.final_k = state.k;
      return report;
    }
    report.iterations.push_back(rec);
  }
  report.final_k = state.k;
  report.completed = true;
  return report;
}

}  // namespace sievebank

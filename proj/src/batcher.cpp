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

#include "batcher.hpp"

#include <algorithm>
#include <sstream>

#include "io_util.hpp"
#include "rng.hpp"

namespace sievebank {

BatchSchedule build_schedule(const SelectionResult& selection,
                             uint32_t batch_size, uint32_t epochs,
                             uint64_t seed) {
  if (batch_size < 1) throw InvalidArgumentError("batch size must be >= 1");
  if (selection.per_target.empty())
    throw InvalidArgumentError("selection has no targets");
  for (const auto& set : selection.per_target)
    if (set.neighbors.empty())
      throw InvalidArgumentError("target " + std::to_string(set.target_index) +
                                 " has an empty neighbor set");

  BatchSchedule schedule;
  schedule.batch_size = batch_size;
  schedule.epochs = epochs;
  schedule.seed = seed;

  std::vector<uint32_t> order(selection.per_target.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);

  Rng rng(seed);
  for (uint32_t e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    size_t full_chunks = order.size() / batch_size;
    for (size_t c = 0; c < full_chunks; ++c) {
      std::vector<BatchEntry> batch;
      batch.reserve(2 * batch_size);
      std::vector<uint32_t> paired(batch_size);
      for (uint32_t j = 0; j < batch_size; ++j) {
        const NeighborSet& set = selection.per_target[order[c * batch_size + j]];
        uint32_t pick = static_cast<uint32_t>(rng.below(set.neighbors.size()));
        paired[j] = set.neighbors[pick].source_index;
        batch.push_back({Domain::Target, set.target_index, paired[j]});
      }
      for (uint32_t j = 0; j < batch_size; ++j)
        batch.push_back({Domain::Source, paired[j], std::nullopt});
      schedule.batches.push_back(std::move(batch));
    }
  }
  return schedule;
}

BatchSchedule build_target_only_schedule(size_t n_targets, uint32_t batch_size,
                                         uint32_t epochs, uint64_t seed) {
  if (batch_size < 1) throw InvalidArgumentError("batch size must be >= 1");
  if (n_targets == 0) throw InvalidArgumentError("no targets to schedule");

  BatchSchedule schedule;
  schedule.batch_size = batch_size;
  schedule.epochs = epochs;
  schedule.seed = seed;

  std::vector<uint32_t> order(n_targets);
  for (size_t i = 0; i < n_targets; ++i) order[i] = static_cast<uint32_t>(i);

  Rng rng(seed);
  for (uint32_t e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    size_t full_chunks = order.size() / batch_size;
    for (size_t c = 0; c < full_chunks; ++c) {
      std::vector<BatchEntry> batch;
      batch.reserve(batch_size);
      for (uint32_t j = 0; j < batch_size; ++j)
        batch.push_back({Domain::Target, order[c * batch_size + j], std::nullopt});
      schedule.batches.push_back(std::move(batch));
    }
  }
  return schedule;
}

void save_schedule(const BatchSchedule& schedule,
                   const std::filesystem::path& path) {
  atomic_write(path, [&](std::ostream& out) {
    for (size_t b = 0; b < schedule.batches.size(); ++b) {
      for (const auto& entry : schedule.batches[b]) {
        out << b << '\t' << domain_name(entry.domain) << '\t'
            << entry.sample_index << '\t';
        if (entry.paired_index)
          out << *entry.paired_index;
        else
          out << '-';
        out << '\n';
      }
    }
  });
}

BatchSchedule load_schedule(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  BatchSchedule schedule;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    uint64_t batch_index, sample;
    std::string domain, paired;
    fields >> batch_index >> domain >> sample >> paired;
    if (fields.fail())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected `batch domain sample paired`");
    BatchEntry entry;
    if (domain == "target")
      entry.domain = Domain::Target;
    else if (domain == "source")
      entry.domain = Domain::Source;
    else
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": bad domain '" + domain + "'");
    entry.sample_index = static_cast<uint32_t>(sample);
    if (paired != "-") {
      try {
        entry.paired_index = static_cast<uint32_t>(std::stoul(paired));
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": bad paired id '" + paired + "'");
      }
    }
    if (batch_index >= schedule.batches.size()) {
      if (batch_index != schedule.batches.size())
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": batch indices must be consecutive");
      schedule.batches.emplace_back();
    }
    schedule.batches[batch_index].push_back(entry);
  }
  // b is recoverable from the target half of any joint batch.
  if (!schedule.batches.empty()) {
    size_t targets = 0;
    for (const auto& e : schedule.batches.front())
      if (e.domain == Domain::Target) ++targets;
    schedule.batch_size = static_cast<uint32_t>(targets);
  }
  return schedule;
}

}  // namespace sievebank

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

#include "retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "io_util.hpp"
#include "parallel.hpp"

namespace sievebank {

namespace {

void check_layout(const Descriptor& a, const Descriptor& b,
                  const Calibration& cal) {
  size_t dim = cal.filter_count() * cal.bins;
  if (a.hist.size() != dim || b.hist.size() != dim)
    throw InvalidArgumentError(
        "descriptor layout mismatch: expected " + std::to_string(dim) +
        " entries, got " + std::to_string(a.hist.size()) + " and " +
        std::to_string(b.hist.size()));
  if (a.log_hist.size() != dim || b.log_hist.size() != dim)
    throw InvalidArgumentError("descriptor log cache missing");
}

double distance_checked(const Descriptor& a, const Descriptor& b,
                        const Calibration& cal) {
  double total = 0.0;
  size_t offset = 0;
  for (uint32_t n_h : cal.layer_counts) {
    size_t span = static_cast<size_t>(n_h) * cal.bins;
    double layer_sum = 0.0;
    for (size_t i = offset; i < offset + span; ++i)
      layer_sum += (a.hist[i] - b.hist[i]) * (a.log_hist[i] - b.log_hist[i]);
    total += layer_sum / static_cast<double>(n_h);
    offset += span;
  }
  return total;
}

}  // namespace

double distance(const Descriptor& a, const Descriptor& b,
                const Calibration& cal) {
  check_layout(a, b, cal);
  return distance_checked(a, b, cal);
}

NeighborSet top_k(const Descriptor& target, const DescriptorTable& source,
                  uint32_t k, int threads) {
  if (k < 1) throw InvalidArgumentError("k must be >= 1");
  if (source.descriptors.empty())
    throw InvalidArgumentError("empty source table");
  check_layout(target, source.descriptors.front(), source.cal);

  size_t n = source.descriptors.size();
  std::vector<double> dist(n);
  parallel_for(n, threads, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i)
      dist[i] = distance_checked(target, source.descriptors[i], source.cal);
  });

  size_t keep = std::min<size_t>(k, n);
  std::vector<uint32_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
  auto less = [&](uint32_t x, uint32_t y) {
    if (dist[x] != dist[y]) return dist[x] < dist[y];
    return x < y;
  };
  if (keep < n)
    std::nth_element(order.begin(), order.begin() + static_cast<ptrdiff_t>(keep),
                     order.end(), less);
  std::sort(order.begin(), order.begin() + static_cast<ptrdiff_t>(keep), less);

  NeighborSet set;
  set.target_index = target.id.index;
  set.requested_k = k;
  set.neighbors.reserve(keep);
  for (size_t i = 0; i < keep; ++i)
    set.neighbors.push_back({order[i], dist[order[i]]});
  return set;
}

namespace {

void finalize_selection(SelectionResult& result) {
  std::vector<uint32_t> all;
  size_t total = 0;
  for (const auto& set : result.per_target) total += set.neighbors.size();
  all.reserve(total);
  for (const auto& set : result.per_target)
    for (const auto& nb : set.neighbors) all.push_back(nb.source_index);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  result.union_ids = std::move(all);
  result.total_retrieved = total;
  result.overlap_ratio =
      total == 0 ? 0.0
                 : 1.0 - static_cast<double>(result.union_ids.size()) /
                             static_cast<double>(total);
  result.under_coverage = result.union_ids.size() < result.min_union;
}

}  // namespace

SelectionResult select(const DescriptorTable& targets,
                       const DescriptorTable& source,
                       const std::vector<uint32_t>& k_per_target,
                       uint64_t min_union, int threads) {
  if (k_per_target.size() != targets.descriptors.size())
    throw InvalidArgumentError(
        "k_per_target has " + std::to_string(k_per_target.size()) +
        " entries for " + std::to_string(targets.descriptors.size()) +
        " targets");
  if (!targets.cal.same_layout(source.cal))
    throw InvalidArgumentError(
        "target and source tables use different calibrations");

  SelectionResult result;
  result.min_union = min_union;
  result.per_target.resize(targets.descriptors.size());
  parallel_for(targets.descriptors.size(), threads,
               [&](size_t begin, size_t end) {
                 for (size_t i = begin; i < end; ++i)
                   result.per_target[i] = top_k(targets.descriptors[i], source,
                                                k_per_target[i], 1);
               });
  finalize_selection(result);
  return result;
}

void save_selection(const SelectionResult& selection,
                    const std::filesystem::path& path) {
  atomic_write(path, [&](std::ostream& out) {
    for (const auto& set : selection.per_target) {
      uint32_t rank = 1;
      for (const auto& nb : set.neighbors)
        out << set.target_index << '\t' << rank++ << '\t' << nb.source_index
            << '\t' << format_g9(nb.distance) << '\n';
    }
  });
}

SelectionResult load_selection(const std::filesystem::path& path,
                               uint64_t min_union) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  SelectionResult result;
  result.min_union = min_union;
  NeighborSet current;
  bool have_current = false;

  auto flush = [&]() {
    if (have_current) {
      current.requested_k = static_cast<uint32_t>(current.neighbors.size());
      result.per_target.push_back(std::move(current));
      current = NeighborSet{};
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    uint64_t target, rank, src;
    double dist;
    fields >> target >> rank >> src >> dist;
    if (fields.fail())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected `target rank source distance`");
    if (!have_current || target != current.target_index) {
      if (rank != 1)
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": ranks must restart at 1 per target");
      flush();
      current.target_index = static_cast<uint32_t>(target);
      have_current = true;
    }
    if (rank != current.neighbors.size() + 1)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": rank out of order");
    current.neighbors.push_back({static_cast<uint32_t>(src), dist});
  }
  flush();
  finalize_selection(result);
  return result;
}

}  // namespace sievebank

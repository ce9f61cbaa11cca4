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

#include "descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "io_util.hpp"
#include "parallel.hpp"

namespace sievebank {

namespace {
constexpr uint32_t kCacheFormatVersion = 1;
}

bool Calibration::same_layout(const Calibration& other) const {
  return bins == other.bins && layer_counts == other.layer_counts &&
         filters.size() == other.filters.size() &&
         bank_fingerprint == other.bank_fingerprint;
}

FilterCalibration calibrate_pool(std::vector<double> pool, uint32_t bins) {
  if (pool.empty()) throw InvalidArgumentError("empty calibration pool");
  if (bins < 2) throw InvalidArgumentError("bin count must be >= 2");
  std::sort(pool.begin(), pool.end());

  FilterCalibration fc;
  fc.lower = pool.front();
  fc.upper = pool.back();
  fc.degenerate = fc.lower == fc.upper;
  fc.edges.reserve(bins - 1);
  size_t n = pool.size();
  for (uint32_t k = 1; k < bins; ++k)
    fc.edges.push_back(pool[(static_cast<size_t>(k) * n) / bins]);
  return fc;
}

uint32_t bin_of(const FilterCalibration& fc, uint32_t bins, double value) {
  if (fc.degenerate) return 0;
  auto it = std::upper_bound(fc.edges.begin(), fc.edges.end(), value);
  uint32_t bin = static_cast<uint32_t>(it - fc.edges.begin());
  return std::min(bin, bins - 1);
}

Calibration calibrate(const Corpus& targets, const FilterBank& bank,
                      uint32_t bins, int threads) {
  if (targets.images.empty())
    throw InvalidArgumentError("empty target set for calibration");
  if (bins < 2) throw InvalidArgumentError("bin count must be >= 2");
  size_t filter_count = bank.filter_count();
  if (filter_count == 0) throw InvalidArgumentError("empty filter bank");

  // Pool layout: per filter, responses of image 0, then image 1, ... so the
  // quantile input order is fixed regardless of the thread count.
  size_t n_images = targets.images.size();
  for (size_t i = 0; i < n_images; ++i) {
    const auto& img = targets.images[i];
    if (img.height < bank.max_kernel_height() ||
        img.width < bank.max_kernel_width())
      throw ValidationError("target image " + std::to_string(i) +
                            " smaller than the largest kernel");
  }

  std::vector<std::vector<double>> pools(filter_count);
  {
    // Per-filter map sizes differ only with kernel size, so compute offsets
    // from each image's dimensions.
    std::vector<std::vector<size_t>> offsets(filter_count,
                                             std::vector<size_t>(n_images + 1, 0));
    std::vector<std::pair<uint32_t, uint32_t>> kdims;  // per filter (h, w)
    for (const auto& layer : bank.layers)
      for (uint32_t k = 0; k < layer.kernel_count(); ++k)
        kdims.emplace_back(layer.height, layer.width);
    for (size_t f = 0; f < filter_count; ++f) {
      for (size_t i = 0; i < n_images; ++i) {
        const auto& img = targets.images[i];
        size_t px = static_cast<size_t>(img.height - kdims[f].first + 1) *
                    (img.width - kdims[f].second + 1);
        offsets[f][i + 1] = offsets[f][i] + px;
      }
      pools[f].resize(offsets[f][n_images]);
    }

    parallel_for(n_images, threads, [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) {
        auto maps = respond(targets.images[i], bank);
        for (size_t f = 0; f < filter_count; ++f)
          std::copy(maps[f].values.begin(), maps[f].values.end(),
                    pools[f].begin() + static_cast<ptrdiff_t>(offsets[f][i]));
      }
    });
  }

  Calibration cal;
  cal.bank_fingerprint = bank.fingerprint();
  cal.bins = bins;
  cal.layer_counts = bank.layer_kernel_counts();
  cal.filters.resize(filter_count);
  parallel_for(filter_count, threads, [&](size_t begin, size_t end) {
    for (size_t f = begin; f < end; ++f)
      cal.filters[f] = calibrate_pool(std::move(pools[f]), bins);
  });
  return cal;
}

void Descriptor::rebuild_log_cache() {
  log_hist.resize(hist.size());
  for (size_t i = 0; i < hist.size(); ++i) log_hist[i] = std::log(hist[i]);
}

Descriptor describe(const LabeledImage& image, const FilterBank& bank,
                    const Calibration& cal) {
  if (cal.bank_fingerprint != bank.fingerprint())
    throw ValidationError(
        "calibration fingerprint does not match the filter bank");
  uint32_t bins = cal.bins;
  size_t filter_count = cal.filter_count();

  Descriptor d;
  d.id = image.id;
  d.hist.assign(filter_count * bins, 0.0);

  size_t f = 0;
  std::vector<uint32_t> counts(bins);
  for (const auto& layer : bank.layers) {
    for (uint32_t k = 0; k < layer.kernel_count(); ++k, ++f) {
      ResponseMap map = respond_one(image, layer, k);
      const FilterCalibration& fc = cal.filters[f];
      std::fill(counts.begin(), counts.end(), 0u);
      for (double v : map.values) ++counts[bin_of(fc, bins, v)];
      double inv_n = 1.0 / static_cast<double>(map.values.size());
      double scale = 1.0 - bins * kEpsilonFloor;
      double* block = &d.hist[f * bins];
      for (uint32_t b = 0; b < bins; ++b)
        block[b] = kEpsilonFloor + scale * (counts[b] * inv_n);
    }
  }
  d.rebuild_log_cache();
  return d;
}

DescriptorTable build_table(const Corpus& corpus, const FilterBank& bank,
                            const Calibration& cal, int threads) {
  DescriptorTable table;
  table.domain = corpus.domain;
  table.cal = cal;
  table.descriptors.resize(corpus.images.size());
  parallel_for(corpus.images.size(), threads, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      try {
        table.descriptors[i] = describe(corpus.images[i], bank, cal);
      } catch (const Error& e) {
        throw Error(e.status(), std::string(domain_name(corpus.domain)) +
                                    " sample " + std::to_string(i) + ": " +
                                    e.what());
      }
    }
  });
  return table;
}

void save_cache(const DescriptorCache& cache,
                const std::filesystem::path& path) {
  const Calibration& cal = cache.table.cal;
  if (cal.filter_count() != cache.bank.filter_count())
    throw InvalidArgumentError("calibration filter count mismatch with bank");
  atomic_write(path, [&](std::ostream& out) {
    BinaryWriter w(out);
    w.bytes("SJFD", 4);
    w.u32(kCacheFormatVersion);
    w.u64(cal.bank_fingerprint);
    write_bank_body(w, cache.bank);
    w.u32(cal.bins);
    w.u32(static_cast<uint32_t>(cal.filter_count()));
    for (const auto& fc : cal.filters) {
      w.f64(fc.lower);
      w.f64(fc.upper);
      w.u8(fc.degenerate ? 1 : 0);
      for (double e : fc.edges) w.f64(e);
    }
    w.u8(static_cast<uint8_t>(cache.table.domain));
    w.u64(cache.table.descriptors.size());
    for (const auto& d : cache.table.descriptors) {
      w.u8(static_cast<uint8_t>(d.id.domain));
      w.u32(d.id.index);
      for (double v : d.hist) w.f32(static_cast<float>(v));
    }
  });
}

DescriptorCache load_cache(const std::filesystem::path& path) {
  BinaryReader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "SJFD", 4) != 0)
    throw ParseError("unrecognized descriptor cache format: " + path.string());
  uint32_t version = r.u32();
  if (version != kCacheFormatVersion)
    throw ParseError("descriptor cache version mismatch in " + path.string());

  DescriptorCache cache;
  uint64_t fingerprint = r.u64();
  cache.bank = read_bank_body(r, path.string());
  if (cache.bank.fingerprint() != fingerprint)
    throw ValidationError("embedded bank fingerprint mismatch in " +
                          path.string());

  Calibration& cal = cache.table.cal;
  cal.bank_fingerprint = fingerprint;
  cal.bins = r.u32();
  if (cal.bins < 2 || cal.bins > (1u << 16))
    throw ParseError("implausible bin count in " + path.string());
  uint32_t filter_count = r.u32();
  if (filter_count != cache.bank.filter_count())
    throw ValidationError("calibration filter count mismatch in " +
                          path.string());
  cal.layer_counts = cache.bank.layer_kernel_counts();
  cal.filters.resize(filter_count);
  for (auto& fc : cal.filters) {
    fc.lower = r.f64();
    fc.upper = r.f64();
    fc.degenerate = r.u8() != 0;
    fc.edges.resize(cal.bins - 1);
    for (double& e : fc.edges) e = r.f64();
    if (!std::is_sorted(fc.edges.begin(), fc.edges.end()))
      throw ValidationError("unsorted bin edges in " + path.string());
  }

  cache.table.domain = static_cast<Domain>(r.u8() != 0 ? 1 : 0);
  uint64_t samples = r.u64();
  size_t dim = static_cast<size_t>(filter_count) * cal.bins;
  if (samples > (1ull << 32))
    throw ParseError("implausible sample count in " + path.string());
  cache.table.descriptors.resize(samples);
  for (uint64_t i = 0; i < samples; ++i) {
    Descriptor& d = cache.table.descriptors[i];
    d.id.domain = static_cast<Domain>(r.u8() != 0 ? 1 : 0);
    d.id.index = r.u32();
    if (d.id.domain != cache.table.domain || d.id.index != i)
      throw ValidationError("descriptor records not dense in " + path.string());
    d.hist.resize(dim);
    for (double& v : d.hist) {
      v = r.f32();
      if (!std::isfinite(v) || v <= 0.0)
        throw ValidationError("invalid histogram entry in " + path.string());
    }
    d.rebuild_log_cache();
  }
  return cache;
}

}  // namespace sievebank

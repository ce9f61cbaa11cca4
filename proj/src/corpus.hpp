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

#ifndef SIEVEBANK_CORPUS_HPP_
#define SIEVEBANK_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "common.hpp"

namespace sievebank {

struct ManifestRecord {
  std::string path;  // relative to the manifest's directory
  int label = 0;
  Domain domain = Domain::Source;
};

// Line-oriented corpus index. Within each domain, sample index i refers to
// the i-th record of that domain in file order.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;
  std::array<std::vector<uint32_t>, 2> by_domain;  // record index per domain
  std::array<int, 2> class_counts = {0, 0};

  size_t domain_size(Domain d) const {
    return by_domain[static_cast<size_t>(d)].size();
  }
  int class_count(Domain d) const {
    return class_counts[static_cast<size_t>(d)];
  }
  const ManifestRecord& record(SampleId id) const;
  std::vector<int> labels(Domain d) const;
};

// Format: `<relative-path>\t<label-int>\t<source|target>` per line, `#`
// starts a comment line. Labels must be dense 0..C-1 within each domain.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct LabeledImage {
  SampleId id;
  int label = 0;
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<double> pixels;  // row-major, intensities in [0, 1]

  double at(uint32_t r, uint32_t c) const { return pixels[r * width + c]; }
};

// Decoded images of one domain, indexed by sample index.
struct Corpus {
  Domain domain = Domain::Target;
  int classes = 0;
  std::vector<LabeledImage> images;

  size_t size() const { return images.size(); }
};

// Grayscale and RGB NetPBM rasters (P2/P3/P5/P6). RGB collapses to luminance
// 0.299 R + 0.587 G + 0.114 B; samples scale by maxval into [0, 1].
// min_height/min_width, when nonzero, reject images smaller than the largest
// configured kernel.
LabeledImage load_image(const Manifest& manifest, SampleId id,
                        uint32_t min_height = 0, uint32_t min_width = 0);

Corpus load_domain(const Manifest& manifest, Domain domain, int threads,
                   uint32_t min_height = 0, uint32_t min_width = 0);

// 8-bit binary PGM writer used by the synthetic generator and tests.
void write_pgm(const std::filesystem::path& path, uint32_t height,
               uint32_t width, const std::vector<uint8_t>& gray);

}  // namespace sievebank

#endif  // SIEVEBANK_CORPUS_HPP_

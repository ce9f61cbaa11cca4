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

#ifndef SIEVEBANK_FILTERBANK_HPP_
#define SIEVEBANK_FILTERBANK_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"

namespace sievebank {

enum class Nonlinearity : uint8_t { None = 0, RectifyAtZero = 1 };

// One group of same-sized kernels sharing a nonlinearity. N_h (the kernel
// count) is the per-layer weight denominator in the retrieval distance.
struct FilterLayer {
  std::string name;
  uint32_t height = 0;
  uint32_t width = 0;
  uint32_t source_channels = 1;  // channel count in the stored bank
  Nonlinearity nonlinearity = Nonlinearity::None;
  std::vector<std::vector<double>> kernels;  // row-major h*w each

  uint32_t kernel_count() const { return static_cast<uint32_t>(kernels.size()); }
};

struct FilterBank {
  std::vector<FilterLayer> layers;

  size_t filter_count() const;
  uint32_t max_kernel_height() const;
  uint32_t max_kernel_width() const;
  std::vector<uint32_t> layer_kernel_counts() const;
  // Stable hash of the bank structure plus kernels at float32 precision, so
  // a bank and its saved/reloaded copy fingerprint identically.
  uint64_t fingerprint() const;
};

// Complex Gabor bank: one layer of real parts and one of imaginary parts,
// scales x orientations kernels each. Center frequencies are log-spaced over
// [0.05, 0.4] cycles/pixel, orientations evenly spaced over [0, pi). Every
// kernel is DC-removed and L2-normalized.
FilterBank build_gabor_bank(int scales = 4, int orientations = 6,
                            int kernel_size = 31);

// SJFB binary format, little-endian:
//   "SJFB" | version u32 | layer count u32
//   per layer: name (u32 len + bytes) | kernel count u32 | height u32 |
//              width u32 | channels u32 | nonlinearity u8 |
//              float32 data in (kernel, channel, row, col) order
// Multi-channel kernels collapse to 2-D by channel averaging on load.
FilterBank load_kernel_bank(const std::filesystem::path& path);
void save_kernel_bank(const FilterBank& bank, const std::filesystem::path& path);

class BinaryWriter;
class BinaryReader;

// Bank payload without the SJFB magic/version, shared with the descriptor
// cache format, which embeds the bank it was calibrated against.
void write_bank_body(BinaryWriter& w, const FilterBank& bank);
FilterBank read_bank_body(BinaryReader& r, const std::string& origin);

struct ResponseMap {
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<double> values;

  double at(uint32_t r, uint32_t c) const { return values[r * width + c]; }
};

// Valid-mode 2-D cross-correlation of one kernel over the image, with
// optional clamping of negative responses to zero.
ResponseMap respond_one(const LabeledImage& image, const FilterLayer& layer,
                        uint32_t kernel_index);

// Response maps for every filter in bank order.
std::vector<ResponseMap> respond(const LabeledImage& image,
                                 const FilterBank& bank);

}  // namespace sievebank

#endif  // SIEVEBANK_FILTERBANK_HPP_

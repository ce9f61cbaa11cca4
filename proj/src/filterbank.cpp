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

#include "filterbank.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "io_util.hpp"

namespace sievebank {

namespace {

constexpr uint32_t kBankFormatVersion = 1;
constexpr double kPi = 3.14159265358979323846;
constexpr double kGaborFreqMin = 0.05;  // cycles/pixel
constexpr double kGaborFreqMax = 0.4;
constexpr double kGaborSigmaFreq = 0.56;  // sigma = 0.56 / f, ~1 octave
constexpr double kGaborAspect = 0.5;

void remove_dc_and_normalize(std::vector<double>& k) {
  double mean = 0;
  for (double v : k) mean += v;
  mean /= static_cast<double>(k.size());
  double norm2 = 0;
  for (double& v : k) {
    v -= mean;
    norm2 += v * v;
  }
  double norm = std::sqrt(norm2);
  if (norm < 1e-30)
    throw NumericError("degenerate kernel: zero after DC removal");
  for (double& v : k) v /= norm;
}

uint64_t fnv1a_init() { return 0xcbf29ce484222325ull; }

void fnv1a(uint64_t& h, const void* data, size_t n) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
}

void fnv1a_u32(uint64_t& h, uint32_t v) { fnv1a(h, &v, 4); }

}  // namespace

size_t FilterBank::filter_count() const {
  size_t d = 0;
  for (const auto& layer : layers) d += layer.kernels.size();
  return d;
}

uint32_t FilterBank::max_kernel_height() const {
  uint32_t m = 0;
  for (const auto& layer : layers) m = std::max(m, layer.height);
  return m;
}

uint32_t FilterBank::max_kernel_width() const {
  uint32_t m = 0;
  for (const auto& layer : layers) m = std::max(m, layer.width);
  return m;
}

std::vector<uint32_t> FilterBank::layer_kernel_counts() const {
  std::vector<uint32_t> counts;
  for (const auto& layer : layers) counts.push_back(layer.kernel_count());
  return counts;
}

uint64_t FilterBank::fingerprint() const {
  uint64_t h = fnv1a_init();
  fnv1a_u32(h, static_cast<uint32_t>(layers.size()));
  for (const auto& layer : layers) {
    fnv1a(h, layer.name.data(), layer.name.size());
    fnv1a_u32(h, layer.kernel_count());
    fnv1a_u32(h, layer.height);
    fnv1a_u32(h, layer.width);
    fnv1a_u32(h, static_cast<uint32_t>(layer.nonlinearity));
    for (const auto& kernel : layer.kernels) {
      for (double v : kernel) {
        float f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        fnv1a_u32(h, bits);
      }
    }
  }
  return h;
}

FilterBank build_gabor_bank(int scales, int orientations, int kernel_size) {
  if (scales < 1) throw InvalidArgumentError("gabor scales must be >= 1");
  if (orientations < 1)
    throw InvalidArgumentError("gabor orientations must be >= 1");
  if (kernel_size < 3 || kernel_size % 2 == 0)
    throw InvalidArgumentError("gabor kernel size must be odd and >= 3, got " +
                               std::to_string(kernel_size));

  FilterLayer real_layer, imag_layer;
  real_layer.name = "gabor_real";
  imag_layer.name = "gabor_imag";
  for (FilterLayer* l : {&real_layer, &imag_layer}) {
    l->height = l->width = static_cast<uint32_t>(kernel_size);
    l->nonlinearity = Nonlinearity::None;
  }

  int center = (kernel_size - 1) / 2;
  for (int s = 0; s < scales; ++s) {
    double t = scales == 1 ? 1.0 : static_cast<double>(s) / (scales - 1);
    double freq = kGaborFreqMin * std::pow(kGaborFreqMax / kGaborFreqMin, t);
    double sigma = kGaborSigmaFreq / freq;
    for (int o = 0; o < orientations; ++o) {
      double theta = kPi * o / orientations;
      double ct = std::cos(theta), st = std::sin(theta);
      std::vector<double> re(static_cast<size_t>(kernel_size) * kernel_size);
      std::vector<double> im(re.size());
      for (int y = 0; y < kernel_size; ++y) {
        for (int x = 0; x < kernel_size; ++x) {
          double dx = x - center, dy = y - center;
          double xr = dx * ct + dy * st;
          double yr = -dx * st + dy * ct;
          double envelope = std::exp(
              -(xr * xr + kGaborAspect * kGaborAspect * yr * yr) /
              (2.0 * sigma * sigma));
          double phase = 2.0 * kPi * freq * xr;
          size_t idx = static_cast<size_t>(y) * kernel_size + x;
          re[idx] = envelope * std::cos(phase);
          im[idx] = envelope * std::sin(phase);
        }
      }
      remove_dc_and_normalize(re);
      remove_dc_and_normalize(im);
      real_layer.kernels.push_back(std::move(re));
      imag_layer.kernels.push_back(std::move(im));
    }
  }

  FilterBank bank;
  bank.layers.push_back(std::move(real_layer));
  bank.layers.push_back(std::move(imag_layer));
  return bank;
}

void write_bank_body(BinaryWriter& w, const FilterBank& bank) {
  w.u32(static_cast<uint32_t>(bank.layers.size()));
  for (const auto& layer : bank.layers) {
    w.string(layer.name);
    w.u32(layer.kernel_count());
    w.u32(layer.height);
    w.u32(layer.width);
    w.u32(1);  // in-memory kernels are already collapsed to one channel
    w.u8(static_cast<uint8_t>(layer.nonlinearity));
    for (const auto& kernel : layer.kernels)
      for (double v : kernel) w.f32(static_cast<float>(v));
  }
}

FilterBank read_bank_body(BinaryReader& r, const std::string& origin) {
  uint32_t layer_count = r.u32();
  if (layer_count == 0 || layer_count > 1024)
    throw ParseError("implausible layer count " + std::to_string(layer_count) +
                     " in " + origin);

  FilterBank bank;
  for (uint32_t li = 0; li < layer_count; ++li) {
    FilterLayer layer;
    layer.name = r.string(4096);
    uint32_t kernels = r.u32();
    layer.height = r.u32();
    layer.width = r.u32();
    uint32_t channels = r.u32();
    uint8_t nl = r.u8();
    if (nl > 1)
      throw ParseError("unknown nonlinearity code " + std::to_string(nl) +
                       " in " + origin);
    layer.nonlinearity = static_cast<Nonlinearity>(nl);
    layer.source_channels = channels;
    if (kernels == 0 || layer.height == 0 || layer.width == 0 || channels == 0)
      throw ParseError("zero kernel dimension in layer '" + layer.name +
                       "' of " + origin);
    size_t per_channel = static_cast<size_t>(layer.height) * layer.width;
    if (per_channel > (1u << 24) || kernels > (1u << 20))
      throw ParseError("implausible layer shape in " + origin);
    for (uint32_t k = 0; k < kernels; ++k) {
      std::vector<double> collapsed(per_channel, 0.0);
      for (uint32_t c = 0; c < channels; ++c)
        for (size_t i = 0; i < per_channel; ++i) {
          float v = r.f32();
          if (!std::isfinite(v))
            throw ValidationError("non-finite kernel entry in layer '" +
                                  layer.name + "' of " + origin);
          collapsed[i] += v;
        }
      if (channels > 1)
        for (double& v : collapsed) v /= channels;
      layer.kernels.push_back(std::move(collapsed));
    }
    bank.layers.push_back(std::move(layer));
  }
  return bank;
}

void save_kernel_bank(const FilterBank& bank,
                      const std::filesystem::path& path) {
  atomic_write(path, [&](std::ostream& out) {
    BinaryWriter w(out);
    w.bytes("SJFB", 4);
    w.u32(kBankFormatVersion);
    write_bank_body(w, bank);
  });
}

FilterBank load_kernel_bank(const std::filesystem::path& path) {
  BinaryReader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "SJFB", 4) != 0)
    throw ParseError("unrecognized bank format: " + path.string());
  uint32_t version = r.u32();
  if (version != kBankFormatVersion)
    throw ParseError("bank format version mismatch in " + path.string() +
                     ": got " + std::to_string(version) + ", expected " +
                     std::to_string(kBankFormatVersion));
  return read_bank_body(r, path.string());
}

ResponseMap respond_one(const LabeledImage& image, const FilterLayer& layer,
                        uint32_t kernel_index) {
  if (image.height < layer.height || image.width < layer.width)
    throw ValidationError(
        "image " + std::to_string(image.height) + "x" +
        std::to_string(image.width) + " smaller than kernel " +
        std::to_string(layer.height) + "x" + std::to_string(layer.width));
  const std::vector<double>& kernel = layer.kernels.at(kernel_index);
  ResponseMap map;
  map.height = image.height - layer.height + 1;
  map.width = image.width - layer.width + 1;
  map.values.resize(static_cast<size_t>(map.height) * map.width);

  bool rectify = layer.nonlinearity == Nonlinearity::RectifyAtZero;
  for (uint32_t m = 0; m < map.height; ++m) {
    for (uint32_t n = 0; n < map.width; ++n) {
      double acc = 0.0;
      const double* krow = kernel.data();
      for (uint32_t u = 0; u < layer.height; ++u) {
        const double* irow = &image.pixels[(m + u) * image.width + n];
        for (uint32_t v = 0; v < layer.width; ++v) acc += krow[v] * irow[v];
        krow += layer.width;
      }
      if (rectify && acc < 0.0) acc = 0.0;
      map.values[m * map.width + n] = acc;
    }
  }
  return map;
}

std::vector<ResponseMap> respond(const LabeledImage& image,
                                 const FilterBank& bank) {
  std::vector<ResponseMap> maps;
  maps.reserve(bank.filter_count());
  for (const auto& layer : bank.layers)
    for (uint32_t k = 0; k < layer.kernel_count(); ++k)
      maps.push_back(respond_one(image, layer, k));
  return maps;
}

}  // namespace sievebank

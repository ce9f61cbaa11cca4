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

#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "io_util.hpp"
#include "rng.hpp"

namespace sievebank {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBaseFrequency = 0.15;  // cycles/pixel
constexpr double kAmplitude = 0.35;
constexpr double kPixelNoiseScale = 0.15;
constexpr double kOrientationJitter = kPi / 36.0;
constexpr double kFrequencyJitterRel = 0.1;

// Salt spaces keeping per-image substreams distinct across roles.
enum : uint64_t {
  kSaltSourceTrain = 1u << 20,
  kSaltTargetTrain = 2u << 20,
  kSaltTargetTest = 3u << 20,
};

std::string image_name(const char* prefix, uint32_t family, uint32_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_f%02u_i%04u.pgm", prefix, family, index);
  return buf;
}

}  // namespace

double source_family_orientation(uint32_t family, uint32_t n_source) {
  return kPi * family / n_source;
}

double target_family_orientation(uint32_t family, uint32_t n_target,
                                 uint32_t n_source) {
  auto [lo, hi] = target_neighbor_families(family, n_target, n_source);
  (void)hi;
  return kPi * (lo + 0.5) / n_source;
}

std::pair<uint32_t, uint32_t> target_neighbor_families(uint32_t family,
                                                       uint32_t n_target,
                                                       uint32_t n_source) {
  if (n_target == 0 || n_source < 2)
    throw InvalidArgumentError("need >= 2 source families and >= 1 target");
  uint32_t lo = static_cast<uint32_t>(
      (static_cast<uint64_t>(family) * n_source) / n_target);
  if (lo > n_source - 2) lo = n_source - 2;
  return {lo, lo + 1};
}

LabeledImage render_texture(uint32_t size, double orientation, double frequency,
                            double noise, uint64_t image_seed) {
  Rng rng(image_seed);
  double theta = orientation +
                 noise * kOrientationJitter * (2.0 * rng.unit() - 1.0);
  double freq = frequency *
                (1.0 + noise * kFrequencyJitterRel * (2.0 * rng.unit() - 1.0));
  double phase = 2.0 * kPi * rng.unit();
  double ct = std::cos(theta), st = std::sin(theta);

  LabeledImage img;
  img.height = img.width = size;
  img.pixels.resize(static_cast<size_t>(size) * size);
  for (uint32_t y = 0; y < size; ++y) {
    for (uint32_t x = 0; x < size; ++x) {
      double u = x * ct + y * st;
      double v = 0.5 + kAmplitude * std::sin(2.0 * kPi * freq * u + phase);
      if (noise > 0.0) v += noise * kPixelNoiseScale * rng.normal();
      img.pixels[y * size + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

namespace {

void write_texture(const std::filesystem::path& path, const LabeledImage& img) {
  std::vector<uint8_t> gray(img.pixels.size());
  for (size_t i = 0; i < gray.size(); ++i)
    gray[i] = static_cast<uint8_t>(img.pixels[i] * 255.0 + 0.5);
  write_pgm(path, img.height, img.width, gray);
}

}  // namespace

SyntheticPaths generate_corpus(const SyntheticSpec& spec,
                               const std::filesystem::path& out_dir) {
  if (spec.source_families < 2)
    throw InvalidArgumentError("need at least 2 source families");
  if (spec.source_per_family < 1)
    throw InvalidArgumentError("need at least 1 image per source family");
  if (spec.image_size < 8)
    throw InvalidArgumentError("image size must be >= 8");
  if (spec.target_families > 0 &&
      (spec.target_families < 2 || spec.target_per_family < 1))
    throw InvalidArgumentError(
        "target domain needs >= 2 families with >= 1 image each");
  if (spec.noise < 0.0) throw InvalidArgumentError("noise must be >= 0");

  std::filesystem::path images = out_dir / "images";
  std::error_code ec;
  std::filesystem::create_directories(images, ec);
  if (ec)
    throw IoError("cannot create output directory " + images.string() + ": " +
                  ec.message());

  std::ostringstream manifest, test_manifest;

  for (uint32_t f = 0; f < spec.source_families; ++f) {
    double theta = source_family_orientation(f, spec.source_families);
    for (uint32_t i = 0; i < spec.source_per_family; ++i) {
      uint64_t salt = kSaltSourceTrain + f * 65536ull + i;
      LabeledImage img = render_texture(spec.image_size, theta, kBaseFrequency,
                                        spec.noise, mix_seed(spec.seed, salt));
      std::string name = image_name("src", f, i);
      write_texture(images / name, img);
      manifest << "images/" << name << '\t' << f << "\tsource\n";
    }
  }
  for (uint32_t f = 0; f < spec.target_families; ++f) {
    double theta = target_family_orientation(f, spec.target_families,
                                             spec.source_families);
    for (uint32_t i = 0; i < spec.target_per_family; ++i) {
      uint64_t salt = kSaltTargetTrain + f * 65536ull + i;
      LabeledImage img = render_texture(spec.image_size, theta, kBaseFrequency,
                                        spec.noise, mix_seed(spec.seed, salt));
      std::string name = image_name("tgt", f, i);
      write_texture(images / name, img);
      manifest << "images/" << name << '\t' << f << "\ttarget\n";
    }
    for (uint32_t i = 0; i < spec.target_test_per_family; ++i) {
      uint64_t salt = kSaltTargetTest + f * 65536ull + i;
      LabeledImage img = render_texture(spec.image_size, theta, kBaseFrequency,
                                        spec.noise, mix_seed(spec.seed, salt));
      std::string name = image_name("tst", f, i);
      write_texture(images / name, img);
      test_manifest << "images/" << name << '\t' << f << "\ttarget\n";
    }
  }

  SyntheticPaths paths;
  paths.manifest = out_dir / "manifest.tsv";
  std::string manifest_text = manifest.str();
  atomic_write(paths.manifest,
               [&](std::ostream& out) { out << manifest_text; });
  if (spec.target_families > 0 && spec.target_test_per_family > 0) {
    paths.test_manifest = out_dir / "manifest_test.tsv";
    std::string test_text = test_manifest.str();
    atomic_write(*paths.test_manifest,
                 [&](std::ostream& out) { out << test_text; });
  }
  return paths;
}

FilterBank build_synthetic_learned_bank(uint64_t seed) {
  FilterBank bank;
  struct LayerSpec {
    const char* name;
    uint32_t kernels, size;
  };
  const LayerSpec specs[] = {{"synth_conv1", 12, 7}, {"synth_conv2", 12, 5}};

  Rng rng(mix_seed(seed, 0xbadfeedull));
  for (const auto& ls : specs) {
    FilterLayer layer;
    layer.name = ls.name;
    layer.height = layer.width = ls.size;
    layer.nonlinearity = Nonlinearity::RectifyAtZero;
    for (uint32_t k = 0; k < ls.kernels; ++k) {
      // Random field smoothed with a 3x3 box to put energy at low
      // frequencies, like early conv kernels.
      std::vector<double> raw(static_cast<size_t>(ls.size) * ls.size);
      for (double& v : raw) v = 2.0 * rng.unit() - 1.0;
      std::vector<double> smooth(raw.size(), 0.0);
      for (uint32_t y = 0; y < ls.size; ++y)
        for (uint32_t x = 0; x < ls.size; ++x) {
          double acc = 0.0;
          int n = 0;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              int yy = static_cast<int>(y) + dy, xx = static_cast<int>(x) + dx;
              if (yy < 0 || xx < 0 || yy >= static_cast<int>(ls.size) ||
                  xx >= static_cast<int>(ls.size))
                continue;
              acc += raw[yy * ls.size + xx];
              ++n;
            }
          smooth[y * ls.size + x] = acc / n;
        }
      // Same post-processing as the Gabor bank.
      double mean = 0;
      for (double v : smooth) mean += v;
      mean /= static_cast<double>(smooth.size());
      double norm2 = 0;
      for (double& v : smooth) {
        v -= mean;
        norm2 += v * v;
      }
      double norm = std::sqrt(norm2);
      for (double& v : smooth) v /= norm;
      layer.kernels.push_back(std::move(smooth));
    }
    bank.layers.push_back(std::move(layer));
  }
  return bank;
}

}  // namespace sievebank

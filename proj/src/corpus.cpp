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

#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "io_util.hpp"
#include "parallel.hpp"

namespace sievebank {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

void check_dense_labels(const Manifest& m, Domain d) {
  std::set<int> seen;
  int max_label = -1;
  for (uint32_t rec : m.by_domain[static_cast<size_t>(d)]) {
    int label = m.records[rec].label;
    seen.insert(label);
    max_label = std::max(max_label, label);
  }
  if (seen.empty()) return;
  if (static_cast<int>(seen.size()) != max_label + 1)
    throw ValidationError(std::string("labels not dense in ") + domain_name(d) +
                          " domain: " + std::to_string(seen.size()) +
                          " distinct labels, max label " +
                          std::to_string(max_label));
}

}  // namespace

const ManifestRecord& Manifest::record(SampleId id) const {
  const auto& indices = by_domain[static_cast<size_t>(id.domain)];
  if (id.index >= indices.size())
    throw InvalidArgumentError("sample index " + std::to_string(id.index) +
                               " out of range for " + domain_name(id.domain) +
                               " domain of size " +
                               std::to_string(indices.size()));
  return records[indices[id.index]];
}

std::vector<int> Manifest::labels(Domain d) const {
  std::vector<int> out;
  for (uint32_t rec : by_domain[static_cast<size_t>(d)])
    out.push_back(records[rec].label);
  return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  Manifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path()
                                      : std::filesystem::path(".");

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 3 tab-separated fields, got " +
                       std::to_string(fields.size()));
    ManifestRecord rec;
    rec.path = fields[0];
    if (rec.path.empty())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": empty path");
    try {
      size_t pos = 0;
      rec.label = std::stoi(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": bad label '" + fields[1] + "'");
    }
    if (rec.label < 0)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": negative label");
    if (fields[2] == "source")
      rec.domain = Domain::Source;
    else if (fields[2] == "target")
      rec.domain = Domain::Target;
    else
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": domain must be 'source' or 'target', got '" +
                       fields[2] + "'");
    m.by_domain[static_cast<size_t>(rec.domain)].push_back(
        static_cast<uint32_t>(m.records.size()));
    m.records.push_back(std::move(rec));
  }
  if (m.records.empty()) throw ValidationError("empty manifest: " + path.string());

  for (Domain d : {Domain::Source, Domain::Target}) {
    check_dense_labels(m, d);
    int max_label = -1;
    for (uint32_t rec : m.by_domain[static_cast<size_t>(d)])
      max_label = std::max(max_label, m.records[rec].label);
    m.class_counts[static_cast<size_t>(d)] = max_label + 1;
  }
  return m;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  atomic_write(path, [&](std::ostream& out) {
    for (const auto& rec : manifest.records)
      out << rec.path << '\t' << rec.label << '\t' << domain_name(rec.domain)
          << '\n';
  });
}

namespace {

// Minimal NetPBM reader: P2/P3 (ASCII) and P5/P6 (binary), maxval <= 65535.
struct PnmImage {
  uint32_t height = 0, width = 0, channels = 1;
  std::vector<double> samples;  // interleaved, scaled to [0,1]
};

class PnmParser {
 public:
  PnmParser(const std::string& data, const std::string& origin)
      : data_(data), origin_(origin) {}

  PnmImage parse() {
    std::string magic = token();
    bool binary;
    uint32_t channels;
    if (magic == "P2") { binary = false; channels = 1; }
    else if (magic == "P3") { binary = false; channels = 3; }
    else if (magic == "P5") { binary = true; channels = 1; }
    else if (magic == "P6") { binary = true; channels = 3; }
    else throw ParseError(origin_ + ": unsupported raster format '" + magic + "'");

    uint32_t width = number();
    uint32_t height = number();
    uint32_t maxval = number();
    if (width == 0 || height == 0)
      throw ParseError(origin_ + ": zero image dimension");
    if (maxval == 0 || maxval > 65535)
      throw ParseError(origin_ + ": bad maxval " + std::to_string(maxval));

    PnmImage img;
    img.height = height;
    img.width = width;
    img.channels = channels;
    size_t n = static_cast<size_t>(height) * width * channels;
    img.samples.resize(n);
    double scale = 1.0 / maxval;

    if (binary) {
      // Exactly one whitespace byte separates the header from the raster.
      if (pos_ >= data_.size())
        throw ParseError(origin_ + ": truncated raster");
      ++pos_;
      int bytes_per = maxval > 255 ? 2 : 1;
      if (data_.size() - pos_ < n * bytes_per)
        throw ParseError(origin_ + ": truncated raster data");
      for (size_t i = 0; i < n; ++i) {
        uint32_t v;
        if (bytes_per == 1) {
          v = static_cast<uint8_t>(data_[pos_++]);
        } else {
          // Two-byte samples are big-endian per the format.
          v = static_cast<uint32_t>(static_cast<uint8_t>(data_[pos_])) << 8 |
              static_cast<uint8_t>(data_[pos_ + 1]);
          pos_ += 2;
        }
        img.samples[i] = v * scale;
      }
    } else {
      for (size_t i = 0; i < n; ++i) img.samples[i] = number() * scale;
    }
    return img;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_space_and_comments();
    size_t start = pos_;
    while (pos_ < data_.size() &&
           !std::isspace(static_cast<unsigned char>(data_[pos_])))
      ++pos_;
    if (start == pos_) throw ParseError(origin_ + ": truncated header");
    return data_.substr(start, pos_ - start);
  }

  uint32_t number() {
    std::string t = token();
    uint32_t v = 0;
    for (char c : t) {
      if (c < '0' || c > '9')
        throw ParseError(origin_ + ": expected number, got '" + t + "'");
      v = v * 10 + static_cast<uint32_t>(c - '0');
      if (v > 1u << 30) throw ParseError(origin_ + ": number too large");
    }
    return v;
  }

  const std::string& data_;
  std::string origin_;
  size_t pos_ = 0;
};

}  // namespace

LabeledImage load_image(const Manifest& manifest, SampleId id,
                        uint32_t min_height, uint32_t min_width) {
  const ManifestRecord& rec = manifest.record(id);
  std::filesystem::path full = manifest.base_dir / rec.path;
  std::string data = read_text_file(full);
  PnmImage raw = PnmParser(data, full.string()).parse();

  LabeledImage img;
  img.id = id;
  img.label = rec.label;
  img.height = raw.height;
  img.width = raw.width;
  size_t n = static_cast<size_t>(raw.height) * raw.width;
  img.pixels.resize(n);
  if (raw.channels == 1) {
    img.pixels = std::move(raw.samples);
  } else {
    for (size_t i = 0; i < n; ++i) {
      const double* px = &raw.samples[i * 3];
      img.pixels[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
  }
  if ((min_height && img.height < min_height) ||
      (min_width && img.width < min_width))
    throw ValidationError(full.string() + ": image " +
                          std::to_string(img.height) + "x" +
                          std::to_string(img.width) +
                          " smaller than kernel " + std::to_string(min_height) +
                          "x" + std::to_string(min_width));
  return img;
}

Corpus load_domain(const Manifest& manifest, Domain domain, int threads,
                   uint32_t min_height, uint32_t min_width) {
  Corpus corpus;
  corpus.domain = domain;
  corpus.classes = manifest.class_count(domain);
  size_t n = manifest.domain_size(domain);
  corpus.images.resize(n);
  parallel_for(n, threads, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i)
      corpus.images[i] = load_image(
          manifest, SampleId{domain, static_cast<uint32_t>(i)}, min_height,
          min_width);
  });
  return corpus;
}

void write_pgm(const std::filesystem::path& path, uint32_t height,
               uint32_t width, const std::vector<uint8_t>& gray) {
  if (gray.size() != static_cast<size_t>(height) * width)
    throw InvalidArgumentError("pixel buffer size mismatch");
  atomic_write(path, [&](std::ostream& out) {
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(gray.data()),
              static_cast<std::streamsize>(gray.size()));
  });
}

}  // namespace sievebank

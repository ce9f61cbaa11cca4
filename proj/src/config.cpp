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

#include "config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "io_util.hpp"

namespace sievebank {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  in >> v;
  if (in.fail() || !in.eof())
    throw ParseError("bad value for " + key + ": '" + value + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (value.find('-') != std::string::npos)
      throw ParseError("bad value for " + key + ": '" + value + "'");
  }
  return v;
}

// Binds each `section.key` to a setter; one table serves file parsing,
// overrides, and serialization.
struct Binding {
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::map<std::string, Binding> make_bindings() {
  std::map<std::string, Binding> b;
  auto str = [&](const char* key, std::string PipelineConfig::* field) {
    b[key] = {[field](PipelineConfig& c, const std::string& v) { c.*field = v; },
              [field](const PipelineConfig& c) { return c.*field; }};
  };
  auto num = [&]<typename T>(const char* key, T PipelineConfig::* field) {
    b[key] = {[key, field](PipelineConfig& c, const std::string& v) {
                c.*field = parse_number<T>(key, v);
              },
              [field](const PipelineConfig& c) {
                std::ostringstream out;
                out << c.*field;
                return out.str();
              }};
  };
  auto syn = [&]<typename T>(const char* key, T SyntheticSpec::* field) {
    b[key] = {[key, field](PipelineConfig& c, const std::string& v) {
                c.synthetic.*field = parse_number<T>(key, v);
              },
              [field](const PipelineConfig& c) {
                std::ostringstream out;
                out << c.synthetic.*field;
                return out.str();
              }};
  };

  str("paths.source_manifest", &PipelineConfig::source_manifest);
  str("paths.target_manifest", &PipelineConfig::target_manifest);
  str("paths.target_test_manifest", &PipelineConfig::target_test_manifest);
  str("paths.target_desc", &PipelineConfig::target_desc);
  str("paths.source_desc", &PipelineConfig::source_desc);
  str("paths.bank", &PipelineConfig::bank);
  str("paths.out_dir", &PipelineConfig::out_dir);

  num("gabor.scales", &PipelineConfig::gabor_scales);
  num("gabor.orientations", &PipelineConfig::gabor_orientations);
  num("gabor.kernel_size", &PipelineConfig::gabor_kernel_size);

  num("descriptor.bins", &PipelineConfig::bins);

  num("retrieval.k0", &PipelineConfig::k0);
  num("retrieval.min_union", &PipelineConfig::min_union);

  num("loop.delta", &PipelineConfig::delta);
  num("loop.sigma0", &PipelineConfig::sigma0);
  num("loop.sigma1", &PipelineConfig::sigma1);
  num("loop.max_iterations", &PipelineConfig::max_iterations);

  num("trainer.feature_width", &PipelineConfig::feature_width);
  num("trainer.learning_rate", &PipelineConfig::learning_rate);
  num("trainer.momentum", &PipelineConfig::momentum);
  num("trainer.weight_decay", &PipelineConfig::weight_decay);
  num("trainer.lambda", &PipelineConfig::lambda);
  num("trainer.init_scale", &PipelineConfig::init_scale);
  num("trainer.batch", &PipelineConfig::batch);
  num("trainer.epochs_per_iteration", &PipelineConfig::epochs_per_iteration);

  syn("synthetic.source_families", &SyntheticSpec::source_families);
  syn("synthetic.source_per_family", &SyntheticSpec::source_per_family);
  syn("synthetic.target_families", &SyntheticSpec::target_families);
  syn("synthetic.target_per_family", &SyntheticSpec::target_per_family);
  syn("synthetic.target_test_per_family", &SyntheticSpec::target_test_per_family);
  syn("synthetic.image_size", &SyntheticSpec::image_size);
  syn("synthetic.noise", &SyntheticSpec::noise);

  num("global.seed", &PipelineConfig::seed);
  num("global.threads", &PipelineConfig::threads);
  return b;
}

const std::map<std::string, Binding>& bindings() {
  static const std::map<std::string, Binding> b = make_bindings();
  return b;
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  PipelineConfig config;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected `key = value`");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (section.empty())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": key outside any [section]");
    try {
      apply_override(config, section + "." + key, value);
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return config;
}

void apply_override(PipelineConfig& config, const std::string& key,
                    const std::string& value) {
  auto it = bindings().find(key);
  if (it == bindings().end())
    throw InvalidArgumentError("unknown config key '" + key + "'");
  it->second.set(config, value);
}

std::vector<std::string> validate_config(const PipelineConfig& c) {
  std::vector<std::string> errors;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };

  require(c.gabor_scales >= 1, "gabor.scales must be >= 1");
  require(c.gabor_orientations >= 1, "gabor.orientations must be >= 1");
  require(c.gabor_kernel_size >= 3 && c.gabor_kernel_size % 2 == 1,
          "gabor.kernel_size must be odd and >= 3");
  require(c.bins >= 2, "descriptor.bins must be >= 2");
  require(c.k0 >= 1, "retrieval.k0 must be >= 1");
  require(c.delta > 0.0, "loop.delta must be > 0");
  require(c.max_iterations >= 1, "loop.max_iterations must be >= 1");
  require(c.feature_width >= 1, "trainer.feature_width must be >= 1");
  require(c.learning_rate > 0.0, "trainer.learning_rate must be > 0");
  require(c.momentum >= 0.0 && c.momentum < 1.0,
          "trainer.momentum must be in [0, 1)");
  require(c.weight_decay >= 0.0, "trainer.weight_decay must be >= 0");
  require(c.lambda >= 0.0, "trainer.lambda must be >= 0");
  require(c.init_scale > 0.0, "trainer.init_scale must be > 0");
  require(c.batch >= 1, "trainer.batch must be >= 1");
  require(c.epochs_per_iteration >= 1,
          "trainer.epochs_per_iteration must be >= 1");
  require(c.synthetic.source_families >= 2,
          "synthetic.source_families must be >= 2");
  require(c.synthetic.source_per_family >= 1,
          "synthetic.source_per_family must be >= 1");
  require(c.synthetic.image_size >= 8, "synthetic.image_size must be >= 8");
  require(c.synthetic.noise >= 0.0, "synthetic.noise must be >= 0");
  require(c.threads >= 0, "global.threads must be >= 0");
  return errors;
}

void save_config(const PipelineConfig& config,
                 const std::filesystem::path& path) {
  atomic_write(path, [&](std::ostream& out) {
    std::string section;
    for (const auto& [key, binding] : bindings()) {
      size_t dot = key.find('.');
      std::string sec = key.substr(0, dot);
      if (sec != section) {
        if (!section.empty()) out << '\n';
        out << '[' << sec << "]\n";
        section = sec;
      }
      out << key.substr(dot + 1) << " = " << binding.get(config) << '\n';
    }
  });
}

}  // namespace sievebank

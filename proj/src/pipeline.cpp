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

#include "pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <sstream>

#include "io_util.hpp"
#include "rng.hpp"

namespace sievebank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr uint64_t kSaltModelInit = 0x140de1ull;
constexpr uint64_t kSaltRandomSelection = 0xab5000ull;

void log_line(const std::string& msg) {
  std::cerr << "[sievebank] " << msg << "\n";
}

double accuracy(const std::vector<PredictionRecord>& preds) {
  if (preds.empty()) return 0.0;
  size_t correct = 0;
  for (const auto& p : preds) correct += p.predicted == p.label;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

SelectionResult random_selection(size_t n_targets, size_t n_source, uint32_t k,
                                 uint64_t seed) {
  SelectionResult sel;
  uint32_t keep = static_cast<uint32_t>(std::min<size_t>(k, n_source));
  for (size_t t = 0; t < n_targets; ++t) {
    Rng rng(mix_seed(seed, kSaltRandomSelection + t));
    std::vector<uint32_t> ids(n_source);
    for (size_t i = 0; i < n_source; ++i) ids[i] = static_cast<uint32_t>(i);
    // Partial Fisher-Yates: the first `keep` slots are a uniform sample.
    for (uint32_t i = 0; i < keep; ++i) {
      size_t j = i + static_cast<size_t>(rng.below(n_source - i));
      std::swap(ids[i], ids[j]);
    }
    NeighborSet set;
    set.target_index = static_cast<uint32_t>(t);
    set.requested_k = keep;
    for (uint32_t i = 0; i < keep; ++i) set.neighbors.push_back({ids[i], 0.0});
    std::sort(set.neighbors.begin(), set.neighbors.end(),
              [](const Neighbor& a, const Neighbor& b) {
                return a.source_index < b.source_index;
              });
    sel.per_target.push_back(std::move(set));
  }
  std::vector<uint32_t> all;
  for (const auto& s : sel.per_target)
    for (const auto& nb : s.neighbors) all.push_back(nb.source_index);
  sel.total_retrieved = all.size();
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  sel.union_ids = std::move(all);
  sel.overlap_ratio =
      sel.total_retrieved == 0
          ? 0.0
          : 1.0 - static_cast<double>(sel.union_ids.size()) / sel.total_retrieved;
  return sel;
}

SelectionResult full_selection(size_t n_targets, size_t n_source) {
  SelectionResult sel;
  for (size_t t = 0; t < n_targets; ++t) {
    NeighborSet set;
    set.target_index = static_cast<uint32_t>(t);
    set.requested_k = static_cast<uint32_t>(n_source);
    set.neighbors.reserve(n_source);
    for (size_t s = 0; s < n_source; ++s)
      set.neighbors.push_back({static_cast<uint32_t>(s), 0.0});
    sel.per_target.push_back(std::move(set));
  }
  sel.union_ids.resize(n_source);
  for (size_t s = 0; s < n_source; ++s)
    sel.union_ids[s] = static_cast<uint32_t>(s);
  sel.total_retrieved = n_targets * n_source;
  sel.overlap_ratio =
      sel.total_retrieved == 0
          ? 0.0
          : 1.0 - static_cast<double>(n_source) / sel.total_retrieved;
  return sel;
}

json iteration_json(const IterationRecord& rec, double test_acc,
                    double train_acc) {
  json j;
  j["iteration"] = rec.iteration;
  j["k_min"] = rec.k_min;
  j["k_max"] = rec.k_max;
  j["k_mean"] = rec.k_mean;
  j["union"] = rec.union_size;
  j["under_coverage"] = rec.under_coverage;
  j["overlap_ratio"] = rec.overlap_ratio;
  j["cases"] = {{"wrong", rec.cases.wrong},
                {"uncertain", rec.cases.uncertain},
                {"easy", rec.cases.easy}};
  j["mean_entropy"] = rec.mean_entropy;
  j["final_loss"] = rec.train.final_loss;
  j["batches"] = rec.train.batches;
  j["train_accuracy"] = train_acc;
  if (test_acc >= 0.0) j["test_accuracy"] = test_acc;
  return j;
}

}  // namespace

const char* mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Selective: return "selective";
    case RunMode::RandomSource: return "random_source";
    case RunMode::AllSource: return "all_source";
    case RunMode::NoIteration: return "no_iteration";
    case RunMode::NoSource: return "no_source";
    case RunMode::LoadedBank: return "loaded_bank";
  }
  return "unknown";
}

LoopData PreparedData::loop_data() const {
  LoopData data;
  data.targets = &target_table;
  data.source = &source_table;
  data.target_labels = target_labels;
  data.source_labels = source_labels;
  data.target_classes = target_classes;
  data.source_classes = source_classes;
  return data;
}

PipelineConfig demo_default_config() {
  PipelineConfig c;
  c.gabor_kernel_size = 9;
  c.bins = 12;
  c.k0 = 40;
  c.min_union = 150;
  c.batch = 6;
  c.epochs_per_iteration = 20;
  c.learning_rate = 0.1;
  c.synthetic.source_families = 6;
  c.synthetic.source_per_family = 60;
  c.synthetic.target_families = 3;
  c.synthetic.target_per_family = 12;
  c.synthetic.target_test_per_family = 8;
  c.synthetic.image_size = 32;
  c.synthetic.noise = 0.25;
  return c;
}

void merge_config_file(PipelineConfig& config, const fs::path& path) {
  // Syntax-check the file first, then replay its keys onto the existing
  // config so defaults for absent keys survive.
  load_config(path);
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = line;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      size_t e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    t = trim(t);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    apply_override(config, section + "." + key, value);
  }
}

PreparedData prepare_from_manifests(const PipelineConfig& config,
                                    const FilterBank& bank,
                                    const fs::path& target_manifest,
                                    const fs::path& source_manifest,
                                    const fs::path& test_manifest,
                                    const fs::path& artifacts_dir) {
  int threads = config.threads;
  PreparedData data;
  data.bank = bank;

  Manifest tm = load_manifest(target_manifest);
  Manifest sm = source_manifest == target_manifest
                    ? tm
                    : load_manifest(source_manifest);
  if (tm.domain_size(Domain::Target) == 0)
    throw ValidationError("no target-domain records in " +
                          target_manifest.string());
  if (sm.domain_size(Domain::Source) == 0)
    throw ValidationError("no source-domain records in " +
                          source_manifest.string());

  uint32_t kh = data.bank.max_kernel_height();
  uint32_t kw = data.bank.max_kernel_width();

  log_line("loading target domain (" +
           std::to_string(tm.domain_size(Domain::Target)) + " images)");
  Corpus target = load_domain(tm, Domain::Target, threads, kh, kw);
  log_line("loading source domain (" +
           std::to_string(sm.domain_size(Domain::Source)) + " images)");
  Corpus source = load_domain(sm, Domain::Source, threads, kh, kw);

  log_line("calibrating " + std::to_string(config.bins) +
           "-bin histograms on the target domain");
  Calibration cal = calibrate(target, data.bank, config.bins, threads);
  save_cache({data.bank, {Domain::Target, cal, {}}},
             artifacts_dir / "calibration.sjfd");

  log_line("computing descriptors");
  save_cache({data.bank, build_table(target, data.bank, cal, threads)},
             artifacts_dir / "desc_target.sjfd");
  save_cache({data.bank, build_table(source, data.bank, cal, threads)},
             artifacts_dir / "desc_source.sjfd");
  // Reload so in-memory values are exactly the float32 the files carry;
  // downstream results then match the standalone CLI stages bit for bit.
  data.target_table = load_cache(artifacts_dir / "desc_target.sjfd").table;
  data.source_table = load_cache(artifacts_dir / "desc_source.sjfd").table;

  data.target_labels = tm.labels(Domain::Target);
  data.source_labels = sm.labels(Domain::Source);
  data.target_classes = tm.class_count(Domain::Target);
  data.source_classes = sm.class_count(Domain::Source);

  if (!test_manifest.empty()) {
    Manifest xm = load_manifest(test_manifest);
    if (xm.domain_size(Domain::Target) == 0)
      throw ValidationError("no target-domain records in test manifest " +
                            test_manifest.string());
    Corpus test = load_domain(xm, Domain::Target, threads, kh, kw);
    save_cache({data.bank, build_table(test, data.bank, cal, threads)},
               artifacts_dir / "desc_test.sjfd");
    data.test_table = load_cache(artifacts_dir / "desc_test.sjfd").table;
    data.test_labels = xm.labels(Domain::Target);
  }
  return data;
}

ModeSummary run_mode(const PreparedData& data, const PipelineConfig& config,
                     RunMode mode, const fs::path& run_dir) {
  fs::create_directories(run_dir);
  LoopData loop = data.loop_data();
  size_t n_targets = data.target_table.size();
  size_t n_source = data.source_table.size();
  uint32_t k0 = static_cast<uint32_t>(
      std::min<uint64_t>(config.k0, n_source));

  SurrogateHyperparams hp;
  hp.feature_width = config.feature_width;
  hp.learning_rate = config.learning_rate;
  hp.momentum = config.momentum;
  hp.weight_decay = config.weight_decay;
  hp.lambda_source = config.lambda;
  hp.init_scale = config.init_scale;
  hp.init_seed = mix_seed(config.seed, kSaltModelInit);
  SurrogateTrainer trainer(hp);

  ModeSummary summary;
  summary.mode = mode_name(mode);

  auto eval_test = [&]() -> double {
    if (!data.test_table) return -1.0;
    return accuracy(predict(trainer.model(), Domain::Target, *data.test_table,
                            data.test_labels));
  };
  std::vector<double> train_acc_per_iter;

  auto write_artifacts = [&](int m, const SelectionResult* sel,
                             const BatchSchedule& sched,
                             const std::vector<PredictionRecord>& preds) {
    std::string suffix = "_iter" + std::to_string(m) + ".tsv";
    if (sel) save_selection(*sel, run_dir / ("neighbors" + suffix));
    save_schedule(sched, run_dir / ("schedule" + suffix));
    save_predictions(preds, run_dir / ("predictions" + suffix));
    summary.test_accuracy.push_back(eval_test());
    train_acc_per_iter.push_back(accuracy(preds));
  };

  if (mode == RunMode::Selective || mode == RunMode::LoadedBank) {
    LoopRunConfig rc;
    rc.hard.k0 = k0;
    rc.hard.sigma0 = config.sigma0;
    rc.hard.sigma1 = config.sigma1;
    rc.hard.delta = config.delta;
    rc.hard.max_iterations = config.max_iterations;
    rc.batch_size = config.batch;
    rc.epochs_per_iteration = config.epochs_per_iteration;
    rc.min_union = config.min_union;
    rc.seed = config.seed;
    rc.threads = config.threads;
    summary.report = run_loop(
        loop, trainer, rc,
        [&](int m, const SelectionResult& sel, const BatchSchedule& sched,
            const std::vector<PredictionRecord>& preds) {
          write_artifacts(m, &sel, sched, preds);
        });
    if (!summary.report.completed)
      throw Error(Status::InternalError,
                  "loop aborted: " + summary.report.error);
  } else {
    std::optional<SelectionResult> sel;
    switch (mode) {
      case RunMode::RandomSource:
        sel = random_selection(n_targets, n_source, k0, config.seed);
        break;
      case RunMode::AllSource:
        sel = full_selection(n_targets, n_source);
        break;
      case RunMode::NoIteration: {
        std::vector<uint32_t> ks(n_targets, k0);
        sel = select(data.target_table, data.source_table, ks,
                     config.min_union, config.threads);
        break;
      }
      case RunMode::NoSource:
        break;
      default:
        throw InvalidArgumentError("unhandled mode");
    }

    for (int m = 0; m < config.max_iterations; ++m) {
      uint64_t sched_seed = mix_seed(config.seed, static_cast<uint64_t>(m));
      BatchSchedule sched =
          sel ? build_schedule(*sel, config.batch, config.epochs_per_iteration,
                               sched_seed)
              : build_target_only_schedule(n_targets, config.batch,
                                           config.epochs_per_iteration,
                                           sched_seed);
      IterationRecord rec;
      rec.iteration = m;
      rec.k_min = rec.k_max = sel ? k0 : 0;
      rec.k_mean = sel ? k0 : 0;
      if (sel) {
        rec.union_size = sel->union_size();
        rec.under_coverage = sel->under_coverage;
        rec.overlap_ratio = sel->overlap_ratio;
      }
      rec.train = trainer.train(sched, loop);
      std::vector<PredictionRecord> preds = trainer.predict_targets(loop);
      for (auto& p : preds) p.iteration = m;
      double h = 0.0;
      for (const auto& p : preds) h += entropy(p.probabilities);
      rec.mean_entropy = preds.empty() ? 0.0 : h / preds.size();
      write_artifacts(m, sel ? &*sel : nullptr, sched, preds);
      summary.report.iterations.push_back(rec);
    }
    summary.report.completed = true;
  }

  summary.final_train_accuracy =
      train_acc_per_iter.empty() ? 0.0 : train_acc_per_iter.back();
  summary.final_test_accuracy = eval_test();
  if (summary.final_test_accuracy >= 0.0)
    summary.generalization_gap =
        summary.final_train_accuracy - summary.final_test_accuracy;

  // report.jsonl: one line per iteration plus a summary line.
  atomic_write(run_dir / "report.jsonl", [&](std::ostream& out) {
    for (size_t i = 0; i < summary.report.iterations.size(); ++i) {
      double test = i < summary.test_accuracy.size() ? summary.test_accuracy[i]
                                                     : -1.0;
      double train =
          i < train_acc_per_iter.size() ? train_acc_per_iter[i] : 0.0;
      out << iteration_json(summary.report.iterations[i], test, train).dump()
          << '\n';
    }
    json s;
    s["summary"] = true;
    s["mode"] = summary.mode;
    s["iterations"] = summary.report.iterations.size();
    s["completed"] = summary.report.completed;
    s["final_train_accuracy"] = summary.final_train_accuracy;
    if (summary.final_test_accuracy >= 0.0) {
      s["final_test_accuracy"] = summary.final_test_accuracy;
      s["generalization_gap"] = summary.generalization_gap;
    }
    if (!summary.report.final_k.empty()) {
      auto [mn, mx] = std::minmax_element(summary.report.final_k.begin(),
                                          summary.report.final_k.end());
      s["final_k_min"] = *mn;
      s["final_k_max"] = *mx;
    }
    out << s.dump() << '\n';
  });

  log_line("mode " + summary.mode + ": train_acc=" +
           format_g9(summary.final_train_accuracy) +
           (summary.final_test_accuracy >= 0.0
                ? " test_acc=" + format_g9(summary.final_test_accuracy) +
                      " gap=" + format_g9(summary.generalization_gap)
                : ""));
  return summary;
}

void run_demo(const PipelineConfig& config, bool ablate) {
  if (config.out_dir.empty())
    throw InvalidArgumentError("demo requires paths.out_dir");
  const fs::path out = config.out_dir;
  fs::create_directories(out);

  SyntheticSpec spec = config.synthetic;
  spec.seed = config.seed;
  if (spec.target_families < 2 || spec.target_per_family < 1)
    throw InvalidArgumentError(
        "demo needs synthetic.target_families >= 2 with training images");
  log_line("generating synthetic corpus under " + (out / "corpus").string());
  SyntheticPaths corpus = generate_corpus(spec, out / "corpus");

  FilterBank bank;
  if (config.bank == "gabor")
    bank = build_gabor_bank(config.gabor_scales, config.gabor_orientations,
                            config.gabor_kernel_size);
  else
    bank = load_kernel_bank(config.bank);
  save_kernel_bank(bank, out / "bank.sjfb");

  PreparedData data = prepare_from_manifests(
      config, bank, corpus.manifest, corpus.manifest,
      corpus.test_manifest ? *corpus.test_manifest : fs::path(), out);

  std::vector<ModeSummary> summaries;
  summaries.push_back(
      run_mode(data, config, RunMode::Selective, out / "run_selective"));

  if (ablate) {
    for (RunMode mode : {RunMode::RandomSource, RunMode::AllSource,
                         RunMode::NoIteration, RunMode::NoSource}) {
      summaries.push_back(run_mode(data, config, mode,
                                   out / (std::string("run_") + mode_name(mode))));
    }
    // Same pipeline with a bank loaded from file instead of the Gabor bank.
    fs::path lb_dir = out / "run_loaded_bank";
    fs::create_directories(lb_dir);
    FilterBank learned = build_synthetic_learned_bank(config.seed);
    save_kernel_bank(learned, lb_dir / "bank.sjfb");
    FilterBank loaded = load_kernel_bank(lb_dir / "bank.sjfb");
    PreparedData lb_data = prepare_from_manifests(
        config, loaded, corpus.manifest, corpus.manifest,
        corpus.test_manifest ? *corpus.test_manifest : fs::path(), lb_dir);
    summaries.push_back(run_mode(lb_data, config, RunMode::LoadedBank, lb_dir));
  }

  json all = json::array();
  for (const auto& s : summaries) {
    json j;
    j["mode"] = s.mode;
    j["final_train_accuracy"] = s.final_train_accuracy;
    if (s.final_test_accuracy >= 0.0) {
      j["final_test_accuracy"] = s.final_test_accuracy;
      j["generalization_gap"] = s.generalization_gap;
    }
    if (!s.report.iterations.empty())
      j["final_union"] = s.report.iterations.back().union_size;
    all.push_back(j);
  }
  atomic_write(out / "summary.json",
               [&](std::ostream& o) { o << all.dump(2) << '\n'; });

  std::cout << all.dump(2) << std::endl;
}

void run_iterate(const PipelineConfig& config) {
  if (config.out_dir.empty())
    throw InvalidArgumentError("iterate requires paths.out_dir");
  if (config.target_manifest.empty())
    throw InvalidArgumentError("iterate requires paths.target_manifest");
  const fs::path out = config.out_dir;
  fs::create_directories(out);

  PreparedData data;
  if (!config.target_desc.empty() || !config.source_desc.empty()) {
    if (config.target_desc.empty() || config.source_desc.empty())
      throw InvalidArgumentError(
          "set both paths.target_desc and paths.source_desc or neither");
    DescriptorCache tc = load_cache(config.target_desc);
    DescriptorCache sc = load_cache(config.source_desc);
    if (!tc.table.cal.same_layout(sc.table.cal))
      throw ValidationError("descriptor caches use different calibrations");
    data.bank = std::move(tc.bank);
    data.target_table = std::move(tc.table);
    data.source_table = std::move(sc.table);

    Manifest tm = load_manifest(config.target_manifest);
    Manifest sm = config.source_manifest.empty() ||
                          config.source_manifest == config.target_manifest
                      ? tm
                      : load_manifest(config.source_manifest);
    if (data.target_table.size() != tm.domain_size(Domain::Target))
      throw ValidationError("target cache size does not match manifest");
    if (data.source_table.size() != sm.domain_size(Domain::Source))
      throw ValidationError("source cache size does not match manifest");
    data.target_labels = tm.labels(Domain::Target);
    data.source_labels = sm.labels(Domain::Source);
    data.target_classes = tm.class_count(Domain::Target);
    data.source_classes = sm.class_count(Domain::Source);
    if (!config.target_test_manifest.empty()) {
      Manifest xm = load_manifest(config.target_test_manifest);
      Corpus test = load_domain(xm, Domain::Target, config.threads,
                                data.bank.max_kernel_height(),
                                data.bank.max_kernel_width());
      data.test_table =
          build_table(test, data.bank, data.target_table.cal, config.threads);
      data.test_labels = xm.labels(Domain::Target);
    }
  } else {
    FilterBank bank;
    if (config.bank == "gabor")
      bank = build_gabor_bank(config.gabor_scales, config.gabor_orientations,
                              config.gabor_kernel_size);
    else
      bank = load_kernel_bank(config.bank);
    fs::path source_manifest = config.source_manifest.empty()
                                   ? fs::path(config.target_manifest)
                                   : fs::path(config.source_manifest);
    data = prepare_from_manifests(config, bank, config.target_manifest,
                                  source_manifest,
                                  config.target_test_manifest, out);
  }

  if (data.target_classes < 2)
    throw ValidationError("target domain needs at least 2 classes");
  if (data.source_classes < 2)
    throw ValidationError("source domain needs at least 2 classes");

  run_mode(data, config, RunMode::Selective, out / "run_selective");
}

void run_gen_synthetic(const PipelineConfig& config, const fs::path& out_dir) {
  SyntheticSpec spec = config.synthetic;
  spec.seed = config.seed;
  SyntheticPaths paths = generate_corpus(spec, out_dir);
  log_line("wrote " + paths.manifest.string());
  if (paths.test_manifest) log_line("wrote " + paths.test_manifest->string());
}

}  // namespace sievebank

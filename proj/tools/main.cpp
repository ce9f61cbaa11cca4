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

// `sievebank` command line: thin subcommand wiring over the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "sievebank/sievebank.h"

namespace {

int fail(sjft_status status) {
  std::fprintf(stderr, "sievebank: error [%s]: %s\n", sjft_status_name(status),
               sjft_last_error());
  return status == SJFT_ERR_INVALID_ARGUMENT || status == SJFT_ERR_VALIDATION
             ? 2
             : 1;
}

#define CHECK(call)                                  \
  do {                                               \
    sjft_status status__ = (call);                   \
    if (status__ != SJFT_OK) return fail(status__);  \
  } while (0)

int resolve_threads_flag(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SIEVEBANK_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // library resolves 0 to hardware concurrency
}

sjft_domain parse_domain(const std::string& name) {
  return name == "source" ? SJFT_DOMAIN_SOURCE : SJFT_DOMAIN_TARGET;
}

struct BankHandle {
  sjft_bank* bank = nullptr;
  ~BankHandle() { sjft_bank_close(bank); }
};

// `--bank gabor` builds the default Gabor bank; anything else is a path.
sjft_status open_bank(const std::string& spec, int scales, int orientations,
                      int kernel_size, BankHandle& out) {
  if (spec == "gabor")
    return sjft_bank_build_gabor(scales, orientations, kernel_size, &out.bank);
  return sjft_bank_open(spec.c_str(), &out.bank);
}

struct ConfigHandle {
  sjft_config* config = nullptr;
  ~ConfigHandle() { sjft_config_close(config); }
};

int apply_sets(ConfigHandle& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "sievebank: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return 2;
    }
    CHECK(sjft_config_set(cfg.config, kv.substr(0, eq).c_str(),
                          kv.substr(eq + 1).c_str()));
  }
  return 0;
}

int validate_or_report(const ConfigHandle& cfg) {
  sjft_status status = sjft_config_validate(cfg.config);
  if (status == SJFT_OK) return 0;
  std::fprintf(stderr, "sievebank: invalid configuration:\n%s\n",
               sjft_last_error());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective joint fine-tuning sample selection pipeline"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = all cores; SIEVEBANK_THREADS fallback)");

  // calibrate
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "Calibrate equi-population histogram bins on a domain");
  std::string cal_manifest, cal_bank = "gabor", cal_out, cal_domain = "target";
  uint32_t cal_bins = 16;
  int gabor_scales = 4, gabor_orientations = 6, gabor_kernel_size = 31;
  cal_cmd->add_option("--manifest", cal_manifest, "corpus manifest")->required();
  cal_cmd->add_option("--bank", cal_bank, "'gabor' or an SJFB file");
  cal_cmd->add_option("--bins", cal_bins, "histogram bins per filter");
  cal_cmd->add_option("--domain", cal_domain, "source|target")
      ->check(CLI::IsMember({"source", "target"}));
  cal_cmd->add_option("--scales", gabor_scales, "gabor scales");
  cal_cmd->add_option("--orientations", gabor_orientations, "gabor orientations");
  cal_cmd->add_option("--kernel-size", gabor_kernel_size, "gabor kernel size");
  cal_cmd->add_option("--out", cal_out, "output calibration file")->required();

  // describe
  auto* desc_cmd = app.add_subcommand(
      "describe", "Compute descriptors for a domain under a calibration");
  std::string desc_manifest, desc_cal, desc_out, desc_domain;
  desc_cmd->add_option("--manifest", desc_manifest, "corpus manifest")->required();
  desc_cmd->add_option("--cal", desc_cal, "calibration file")->required();
  desc_cmd->add_option("--domain", desc_domain, "source|target")
      ->required()
      ->check(CLI::IsMember({"source", "target"}));
  desc_cmd->add_option("--out", desc_out, "output descriptor cache")->required();

  // retrieve
  auto* ret_cmd = app.add_subcommand(
      "retrieve", "Rank source images by symmetric KL distance per target");
  std::string ret_target, ret_source, ret_out;
  uint32_t ret_k0 = 0;
  uint64_t ret_min_union = 200000;
  ret_cmd->add_option("--target-desc", ret_target, "target descriptor cache")
      ->required();
  ret_cmd->add_option("--source-desc", ret_source, "source descriptor cache")
      ->required();
  ret_cmd->add_option("--k0", ret_k0, "neighbors per target")->required();
  ret_cmd->add_option("--min-union", ret_min_union,
                      "minimum selected-set size before warning");
  ret_cmd->add_option("--out", ret_out, "output neighbor list")->required();

  // schedule
  auto* sched_cmd = app.add_subcommand(
      "schedule", "Emit a paired target/source mini-batch schedule");
  std::string sched_selection, sched_out;
  uint32_t sched_batch = 10, sched_epochs = 1;
  uint64_t sched_seed = 0;
  sched_cmd->add_option("--selection", sched_selection, "neighbor list file")
      ->required();
  sched_cmd->add_option("--batch", sched_batch, "target samples per batch");
  sched_cmd->add_option("--epochs", sched_epochs, "epochs to schedule");
  sched_cmd->add_option("--seed", sched_seed, "RNG seed");
  sched_cmd->add_option("--out", sched_out, "output schedule")->required();

  // iterate
  auto* iter_cmd = app.add_subcommand(
      "iterate", "Run the hard-sample loop from a config file");
  std::string iter_config;
  std::vector<std::string> iter_sets;
  iter_cmd->add_option("--config", iter_config, "pipeline config")->required();
  iter_cmd->add_option("--set", iter_sets, "override section.key=value");

  // demo
  auto* demo_cmd = app.add_subcommand(
      "demo", "End-to-end synthetic demo of the full selection loop");
  std::string demo_config, demo_out = "demo_out";
  std::vector<std::string> demo_sets;
  uint64_t demo_seed = 7;
  bool demo_ablate = false;
  demo_cmd->add_option("--config", demo_config, "optional pipeline config");
  demo_cmd->add_option("--seed", demo_seed, "global seed");
  demo_cmd->add_option("--out", demo_out, "output directory");
  demo_cmd->add_flag("--ablate", demo_ablate,
                     "also run random/all/no-iteration/no-source/loaded-bank");
  demo_cmd->add_option("--set", demo_sets, "override section.key=value");

  // gen-synthetic
  auto* gen_cmd = app.add_subcommand(
      "gen-synthetic", "Generate an oriented-texture corpus with a manifest");
  uint32_t gen_families = 4, gen_per_family = 50, gen_target_families = 0;
  uint32_t gen_target_per_family = 0, gen_test_per_family = 0, gen_size = 32;
  double gen_noise = 0.25;
  uint64_t gen_seed = 0;
  std::string gen_out;
  gen_cmd->add_option("--families", gen_families, "source texture families");
  gen_cmd->add_option("--per-family", gen_per_family, "images per source family");
  gen_cmd->add_option("--target-families", gen_target_families,
                      "target families (midpoint orientations)");
  gen_cmd->add_option("--target-per-family", gen_target_per_family,
                      "training images per target family");
  gen_cmd->add_option("--test-per-family", gen_test_per_family,
                      "held-out test images per target family");
  gen_cmd->add_option("--size", gen_size, "image side length");
  gen_cmd->add_option("--noise", gen_noise, "noise level");
  gen_cmd->add_option("--seed", gen_seed, "RNG seed");
  gen_cmd->add_option("--out", gen_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  threads = resolve_threads_flag(threads);

  if (cal_cmd->parsed()) {
    BankHandle bank;
    CHECK(open_bank(cal_bank, gabor_scales, gabor_orientations,
                    gabor_kernel_size, bank));
    sjft_manifest* manifest = nullptr;
    CHECK(sjft_manifest_open(cal_manifest.c_str(), &manifest));
    std::unique_ptr<sjft_manifest, decltype(&sjft_manifest_close)> mguard(
        manifest, sjft_manifest_close);
    sjft_cache* cal = nullptr;
    CHECK(sjft_calibrate(manifest, parse_domain(cal_domain), bank.bank,
                         cal_bins, threads, &cal));
    std::unique_ptr<sjft_cache, decltype(&sjft_cache_close)> cguard(
        cal, sjft_cache_close);
    CHECK(sjft_cache_save(cal, cal_out.c_str()));
    std::fprintf(stderr, "sievebank: wrote %s (fingerprint %016llx)\n",
                 cal_out.c_str(),
                 static_cast<unsigned long long>(sjft_cache_fingerprint(cal)));
    return 0;
  }

  if (desc_cmd->parsed()) {
    sjft_cache* cal = nullptr;
    CHECK(sjft_cache_open(desc_cal.c_str(), &cal));
    std::unique_ptr<sjft_cache, decltype(&sjft_cache_close)> cguard(
        cal, sjft_cache_close);
    sjft_manifest* manifest = nullptr;
    CHECK(sjft_manifest_open(desc_manifest.c_str(), &manifest));
    std::unique_ptr<sjft_manifest, decltype(&sjft_manifest_close)> mguard(
        manifest, sjft_manifest_close);
    sjft_cache* table = nullptr;
    CHECK(sjft_describe(manifest, parse_domain(desc_domain), cal, threads,
                        &table));
    std::unique_ptr<sjft_cache, decltype(&sjft_cache_close)> tguard(
        table, sjft_cache_close);
    CHECK(sjft_cache_save(table, desc_out.c_str()));
    std::fprintf(stderr, "sievebank: wrote %s (%lld descriptors)\n",
                 desc_out.c_str(),
                 static_cast<long long>(sjft_cache_sample_count(table)));
    return 0;
  }

  if (ret_cmd->parsed()) {
    sjft_cache* targets = nullptr;
    CHECK(sjft_cache_open(ret_target.c_str(), &targets));
    std::unique_ptr<sjft_cache, decltype(&sjft_cache_close)> tguard(
        targets, sjft_cache_close);
    sjft_cache* source = nullptr;
    CHECK(sjft_cache_open(ret_source.c_str(), &source));
    std::unique_ptr<sjft_cache, decltype(&sjft_cache_close)> sguard(
        source, sjft_cache_close);
    sjft_selection* selection = nullptr;
    CHECK(sjft_retrieve(targets, source, ret_k0, ret_min_union, threads,
                        &selection));
    std::unique_ptr<sjft_selection, decltype(&sjft_selection_close)> selguard(
        selection, sjft_selection_close);
    CHECK(sjft_selection_save(selection, ret_out.c_str()));
    std::fprintf(stderr,
                 "sievebank: wrote %s (union %lld, overlap %.3f%s)\n",
                 ret_out.c_str(),
                 static_cast<long long>(sjft_selection_union_size(selection)),
                 sjft_selection_overlap_ratio(selection),
                 sjft_selection_under_coverage(selection)
                     ? ", WARNING: union below --min-union"
                     : "");
    return 0;
  }

  if (sched_cmd->parsed()) {
    sjft_selection* selection = nullptr;
    CHECK(sjft_selection_open(sched_selection.c_str(), &selection));
    std::unique_ptr<sjft_selection, decltype(&sjft_selection_close)> selguard(
        selection, sjft_selection_close);
    sjft_schedule* schedule = nullptr;
    CHECK(sjft_schedule_build(selection, sched_batch, sched_epochs, sched_seed,
                              &schedule));
    std::unique_ptr<sjft_schedule, decltype(&sjft_schedule_close)> schguard(
        schedule, sjft_schedule_close);
    CHECK(sjft_schedule_save(schedule, sched_out.c_str()));
    std::fprintf(stderr, "sievebank: wrote %s (%lld mini-batches)\n",
                 sched_out.c_str(),
                 static_cast<long long>(sjft_schedule_batch_count(schedule)));
    return 0;
  }

  if (iter_cmd->parsed()) {
    ConfigHandle cfg;
    CHECK(sjft_config_create(&cfg.config));
    CHECK(sjft_config_merge_file(cfg.config, iter_config.c_str()));
    if (int rc = apply_sets(cfg, iter_sets)) return rc;
    if (threads) {
      CHECK(sjft_config_set(cfg.config, "global.threads",
                            std::to_string(threads).c_str()));
    }
    if (int rc = validate_or_report(cfg)) return rc;
    CHECK(sjft_run_iterate(cfg.config));
    return 0;
  }

  if (demo_cmd->parsed()) {
    ConfigHandle cfg;
    CHECK(sjft_config_create_demo(&cfg.config));
    if (!demo_config.empty())
      CHECK(sjft_config_merge_file(cfg.config, demo_config.c_str()));
    if (int rc = apply_sets(cfg, demo_sets)) return rc;
    if (demo_cmd->count("--seed") || demo_config.empty())
      CHECK(sjft_config_set(cfg.config, "global.seed",
                            std::to_string(demo_seed).c_str()));
    if (demo_cmd->count("--out") || demo_config.empty())
      CHECK(sjft_config_set(cfg.config, "paths.out_dir", demo_out.c_str()));
    if (threads) {
      CHECK(sjft_config_set(cfg.config, "global.threads",
                            std::to_string(threads).c_str()));
    }
    if (int rc = validate_or_report(cfg)) return rc;
    CHECK(sjft_run_demo(cfg.config, demo_ablate ? 1 : 0));
    return 0;
  }

  if (gen_cmd->parsed()) {
    ConfigHandle cfg;
    CHECK(sjft_config_create(&cfg.config));
    auto set_num = [&](const char* key, auto value) {
      return sjft_config_set(cfg.config, key, std::to_string(value).c_str());
    };
    CHECK(set_num("synthetic.source_families", gen_families));
    CHECK(set_num("synthetic.source_per_family", gen_per_family));
    CHECK(set_num("synthetic.target_families", gen_target_families));
    CHECK(set_num("synthetic.target_per_family", gen_target_per_family));
    CHECK(set_num("synthetic.target_test_per_family", gen_test_per_family));
    CHECK(set_num("synthetic.image_size", gen_size));
    CHECK(set_num("synthetic.noise", gen_noise));
    CHECK(set_num("global.seed", gen_seed));
    if (int rc = validate_or_report(cfg)) return rc;
    CHECK(sjft_run_gen_synthetic(cfg.config, gen_out.c_str()));
    return 0;
  }

  return 2;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hgct/compat.hpp"
#include "hgct/eval.hpp"
#include "hgct/gradcheck.hpp"
#include "hgct/pipeline.hpp"
#include "hgct/synth.hpp"
#include "hgct/train.hpp"

namespace hgct {

struct ModelConfig {
  int channels = 32;
  int layers = 5;
  std::uint64_t init_seed = 0;
};

struct TrainSuiteConfig {
  int scenes = 64;
  double ratio_min = 0.05;
  double ratio_max = 0.5;
};

/// Everything a command needs, parsed from flat `key = value` text.
struct RunConfig {
  CompatConfig compat;
  PipelineConfig pipeline;
  TrainConfig train;
  TrainSuiteConfig train_suite;
  SynthConfig synth;
  int gen_scenes = 1;
  MetricThresholds metrics;
  ModelConfig model;
  GradcheckConfig gradcheck;
  int gradcheck_n = 8;
  int bench_threads = 0;
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path output;
  std::uint64_t seed = 0;

  /// Propagates the global seed into synth, train and model seeds.
  void set_seed(std::uint64_t s);
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string doc;
};

/// All recognized keys with their defaults, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Applies one assignment; throws Config naming the key (and line when given).
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value, int line = 0);

/// `#` starts a comment; blank lines are ignored; unknown keys are rejected.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Defaults rendered as a commented config file.
std::string default_config_text();

}  // namespace hgct

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "shcnn/benchmark.hpp"
#include "shcnn/localization.hpp"
#include "shcnn/nn/network.hpp"
#include "shcnn/nn/train.hpp"
#include "shcnn/synthwafer.hpp"

namespace shcnn {

// Everything one experiment needs. Loaded from an INI-style file with one
// section per module; see README for the key list.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  WaferLayout layout;
  DatasetOptions dataset;
  int n_wafers = 20;

  // Stage templates and stage classifiers.
  int patch_size = 32;
  int erosion_radius = 1;
  int augmentation_level = 0;
  nn::NetworkConfig network;
  nn::TrainConfig training;

  // Street benchmark run by `eval`.
  BenchmarkConfig benchmark;

  void validate() const;
};

// Throws BadConfig on unknown sections or keys, malformed values, or a config
// that fails validation.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// The benchmark section merged with the shared layout, dataset, network and
// training settings.
BenchmarkConfig benchmark_config(const ExperimentConfig& cfg);

Template stage_template(const ExperimentConfig& cfg, TemplateLevel level);

}  // namespace shcnn

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shcnn/baselines.hpp"
#include "shcnn/eval.hpp"
#include "shcnn/localization.hpp"
#include "shcnn/nn/train.hpp"
#include "shcnn/synthwafer.hpp"

namespace shcnn {

// Street-classification benchmark: every method sees the same streets and the
// same splits. SH-CNN gets the localized ROI in canonical orientation; the
// plain CNN and the baselines get an unlocalized crop of the same street.
struct BenchmarkConfig {
  WaferLayout layout;
  DatasetOptions dataset;
  int n_patches = 600;  // n/3 per class
  int runs = 5;  // run r splits and trains with seed + r
  std::uint64_t seed = 0;
  int patch_size = 32;
  // Unlocalized crop: a context x context window around the nominal street
  // position, shifted by up to pitch/4 per axis, downsampled to patch_size.
  int context = 64;
  std::vector<int> sh_levels{0, 1, 2, 4};
  nn::NetworkConfig network;
  nn::TrainConfig training;
  RfcConfig rfc;
  SvcConfig svc_linear{KernelType::Linear};
  SvcConfig svc_rbf{KernelType::Rbf};
  int mlp_hidden = 100;
  nn::TrainConfig mlp_training;
};

struct StreetSample {
  GrayImage localized;
  GrayImage unlocalized;
  int label = 0;
  int wafer = 0;
  GridAddress street;
};

// Class-balanced street samples. Streets whose localization fails are
// skipped. Throws TooFew when the wafer budget runs out first.
std::vector<StreetSample> build_street_benchmark(const BenchmarkConfig& cfg);

// Box-filter downsampling by an integer factor.
GrayImage downsample(const GrayImage& img, int factor);

using ProgressFn = std::function<void(const std::string&)>;

// Rows in order RFC, SVC-linear, SVC-RBF, MLP, CNN, then SH-CNN per level.
std::vector<ResultRow> run_benchmark(const BenchmarkConfig& cfg, const ProgressFn& progress = {});

}  // namespace shcnn

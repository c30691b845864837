#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shcnn/nn/network.hpp"

namespace shcnn::nn {

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 50;
  int patience = 10;  // epochs without validation improvement before stopping
  std::uint64_t seed = 0;

  void validate() const;
};

struct Example {
  Tensor x;
  int label = 0;
};

struct EpochStats {
  int epoch = 0;
  double train_acc = 0.0;  // running accuracy over the epoch's batches
  double val_acc = 0.0;
  double loss = 0.0;  // mean training loss
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_acc = 0.0;
};

// Mini-batch training on softmax cross-entropy. The network ends holding the
// parameters of the best validation epoch. With an empty validation set the
// running train accuracy is used for model selection.
TrainResult train(Network& net, std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& cfg);

double evaluate_accuracy(Network& net, std::span<const Example> data);

std::string format_history_csv(std::span<const EpochStats> history);
void write_history_csv(const std::filesystem::path& path, std::span<const EpochStats> history);

}  // namespace shcnn::nn

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "shcnn/nn/layers.hpp"

namespace shcnn::nn {

struct NetworkConfig {
  int input_size = 64;  // square input side, divisible by 8
  int in_channels = 1;
  std::array<int, 3> widths{16, 32, 64};
  int dense1_units = 128;
  int n_classes = 3;
  double conv_dropout = 0.25;
  double dense_dropout = 0.5;

  void validate() const;
};

struct MlpConfig {
  int input_features = 0;
  int hidden_units = 100;
  int n_classes = 3;

  void validate() const;
};

// Sequential stack of layers.
class Network {
 public:
  Network() = default;
  Network(std::vector<int> input_shape, std::vector<std::unique_ptr<Layer>> layers);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const std::vector<int>& input_shape() const { return input_shape_; }
  int n_classes() const;
  std::size_t n_layers() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  // Shape after each layer, starting from the input.
  std::vector<std::vector<int>> shapes() const;

  Tensor forward(const Tensor& x, Mode mode, Rng& rng);
  Tensor backward(const Tensor& grad_logits);
  std::vector<ParamRef> params();
  void zero_grad();
  std::size_t parameter_count();

  // Copy of all parameter values, in params() order.
  std::vector<double> flat_parameters();
  void set_flat_parameters(std::span<const double> values);

  // Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
  void initialize(std::uint64_t seed);

 private:
  std::vector<int> input_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// 3 x [conv, relu, conv, relu, maxpool, dropout], flatten, dense, relu, dropout, dense.
Network build_cnn(const NetworkConfig& cfg, std::uint64_t seed);

// flatten, dense, relu, dense.
Network build_mlp(const MlpConfig& cfg, std::uint64_t seed);

struct Prediction {
  int label = 0;
  Tensor probs;
};

// Index of the largest value; ties go to the lowest index.
int argmax(std::span<const double> values);

Prediction predict(Network& net, const Tensor& x);

// Checkpoint layout (little endian):
//   8 bytes  "SHCNNCK1"
//   u32      version (1)
//   u32      input rank, then i32 per input dimension
//   u32      layer count
//   per layer: u32 kind code, then
//     Conv2d:  i32 in, i32 out, u32 padding (0 same, 1 valid)
//     Dropout: f64 rate
//     Dense:   i32 in, i32 out
//   u64      parameter count, then f32 values in params() order
void save_checkpoint(Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace shcnn::nn

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shcnn/nn/tensor.hpp"
#include "shcnn/rng.hpp"

namespace shcnn::nn {

enum class Mode { Train, Infer };
enum class Padding { Same, Valid };

// ---- Stateless operations -------------------------------------------------

// 3x3 stride-1 cross-correlation. x: (C, H, W); kernels: (K, C, 3, 3) stored
// as shape {K, C*9}; bias: K values.
Tensor conv2d(const Tensor& x, const Tensor& kernels, std::span<const double> bias, Padding padding);

struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

// 2x2 stride-2 max pooling; odd sizes are edge-replicated (output ceil(H/2)).
// Ties go to the first element in row-major window order.
PoolResult maxpool2x2(const Tensor& x);

// W * x + b with W of shape {out, in}.
Tensor dense(const Tensor& x, const Tensor& weights, std::span<const double> bias);

// Inverted dropout: survivors scaled by 1 / (1 - rate); identity in Infer.
Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng);

struct SoftmaxLoss {
  double loss = 0.0;
  Tensor probs;
  Tensor grad;  // d loss / d logits = probs - onehot(target)
};

SoftmaxLoss softmax_xent(const Tensor& logits, int target);
Tensor softmax(const Tensor& logits);

// ---- Layers ----------------------------------------------------------------

struct ParamRef {
  std::span<double> values;
  std::span<double> grads;
};

enum class LayerKind : std::uint32_t { Conv2d = 1, ReLU = 2, MaxPool = 3, Dropout = 4, Flatten = 5, Dense = 6 };

// Forward caches whatever backward needs, so each layer instance processes
// one sample at a time. Backward accumulates parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual LayerKind kind() const = 0;
  virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
  virtual Tensor forward(const Tensor& x, Mode mode, Rng& rng) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<ParamRef> params() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Conv2dLayer : public Layer {
 public:
  Conv2dLayer(int in_channels, int out_channels, Padding padding);
  LayerKind kind() const override { return LayerKind::Conv2d; }
  std::vector<int> output_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<ParamRef> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2dLayer>(*this); }

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  Padding padding() const { return padding_; }
  Tensor& weights() { return weights_; }
  std::vector<double>& bias() { return bias_; }

 private:
  int in_;
  int out_;
  Padding padding_;
  Tensor weights_;  // {out, in*9}
  std::vector<double> bias_;
  Tensor weight_grad_;
  std::vector<double> bias_grad_;
  std::vector<double> col_;  // im2col of the last input: (in*9) x (Ho*Wo)
  std::vector<double> dcol_;
  std::vector<int> in_shape_;
  int out_h_ = 0;
  int out_w_ = 0;
};

class ReLULayer : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::ReLU; }
  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
  Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLULayer>(*this); }

 private:
  Tensor input_;
};

class MaxPoolLayer : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::MaxPool; }
  std::vector<int> output_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPoolLayer>(*this); }

 private:
  std::vector<int> in_shape_;
  std::vector<std::size_t> argmax_;
};

class DropoutLayer : public Layer {
 public:
  explicit DropoutLayer(double rate);
  LayerKind kind() const override { return LayerKind::Dropout; }
  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
  Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DropoutLayer>(*this); }
  double rate() const { return rate_; }

 private:
  double rate_;
  std::vector<double> scale_;  // per-element multiplier of the last forward
};

class FlattenLayer : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::Flatten; }
  std::vector<int> output_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<FlattenLayer>(*this); }

 private:
  std::vector<int> in_shape_;
};

class DenseLayer : public Layer {
 public:
  DenseLayer(int in_features, int out_features);
  LayerKind kind() const override { return LayerKind::Dense; }
  std::vector<int> output_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<ParamRef> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

  int in_features() const { return in_; }
  int out_features() const { return out_; }
  Tensor& weights() { return weights_; }
  std::vector<double>& bias() { return bias_; }

 private:
  int in_;
  int out_;
  Tensor weights_;  // {out, in}
  std::vector<double> bias_;
  Tensor weight_grad_;
  std::vector<double> bias_grad_;
  Tensor input_;
};

}  // namespace shcnn::nn

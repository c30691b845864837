#pragma once

// Central finite-difference gradient checks for nn layers.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "shcnn/nn/layers.hpp"
#include "shcnn/rng.hpp"

namespace gradcheck {

using shcnn::Rng;
using shcnn::nn::Layer;
using shcnn::nn::Mode;
using shcnn::nn::Tensor;

inline Tensor random_tensor(Rng& rng, std::vector<int> shape) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

struct Result {
  double input_error = 0.0;
  double param_error = 0.0;
};

// Scalar loss L = sum_i r_i * y_i with fixed random r. Stochastic layers see
// the same RNG stream on every evaluation, so the mask is frozen.
inline Result check_layer(Layer& layer, const std::vector<int>& in_shape, std::uint64_t seed, double eps = 1e-5) {
  Rng rng(seed);
  Tensor x = random_tensor(rng, in_shape);
  const Tensor r = random_tensor(rng, layer.output_shape(in_shape));
  const std::uint64_t mask_seed = rng.next();

  auto loss = [&](const Tensor& input) {
    Rng m(mask_seed);
    const Tensor y = layer.forward(input, Mode::Train, m);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
    return s;
  };

  for (auto& p : layer.params()) std::fill(p.grads.begin(), p.grads.end(), 0.0);
  loss(x);
  const Tensor dx = layer.backward(r);

  Result res;
  std::vector<double> analytic(dx.values().begin(), dx.values().end()), numeric(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = loss(x);
    x[i] = keep - eps;
    const double down = loss(x);
    x[i] = keep;
    numeric[i] = (up - down) / (2 * eps);
  }
  res.input_error = relative_error(analytic, numeric);

  std::vector<double> pa, pn;
  for (auto& p : layer.params()) {
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      pa.push_back(p.grads[i]);
      const double keep = p.values[i];
      p.values[i] = keep + eps;
      const double up = loss(x);
      p.values[i] = keep - eps;
      const double down = loss(x);
      p.values[i] = keep;
      pn.push_back((up - down) / (2 * eps));
    }
  }
  res.param_error = relative_error(pa, pn);
  return res;
}

// Fresh random layer instances of every kind, paired with an input shape.
struct Case {
  const char* name;
  std::unique_ptr<Layer> layer;
  std::vector<int> in_shape;
};

inline std::vector<Case> layer_cases(Rng& rng) {
  using namespace shcnn::nn;
  std::vector<Case> out;
  const int c = 1 + static_cast<int>(rng.below(3));
  const int k = 1 + static_cast<int>(rng.below(3));
  const int h = 3 + static_cast<int>(rng.below(4));
  const int w = 3 + static_cast<int>(rng.below(4));
  for (auto pad : {Padding::Same, Padding::Valid}) {
    auto conv = std::make_unique<Conv2dLayer>(c, k, pad);
    for (auto& v : conv->weights().values()) v = rng.uniform(-1.0, 1.0);
    for (auto& v : conv->bias()) v = rng.uniform(-1.0, 1.0);
    out.push_back({pad == Padding::Same ? "conv2d same" : "conv2d valid", std::move(conv), {c, h, w}});
  }
  out.push_back({"relu", std::make_unique<ReLULayer>(), {c, h, w}});
  out.push_back({"maxpool", std::make_unique<MaxPoolLayer>(), {c, h, w}});
  out.push_back({"dropout", std::make_unique<DropoutLayer>(0.4), {c, h, w}});
  out.push_back({"flatten", std::make_unique<FlattenLayer>(), {c, h, w}});
  auto dense = std::make_unique<DenseLayer>(h * w, k + 1);
  for (auto& v : dense->weights().values()) v = rng.uniform(-1.0, 1.0);
  for (auto& v : dense->bias()) v = rng.uniform(-1.0, 1.0);
  out.push_back({"dense", std::move(dense), {h * w}});
  return out;
}

}  // namespace gradcheck

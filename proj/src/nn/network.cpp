#include "shcnn/nn/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "shcnn/error.hpp"

namespace shcnn::nn {

namespace {

constexpr char kMagic[8] = {'S', 'H', 'C', 'N', 'N', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::IoFailure, "truncated checkpoint");
  return v;
}

}  // namespace

void NetworkConfig::validate() const {
  if (input_size < 8 || input_size % 8 != 0)
    throw Error(ErrorCode::ShapeMismatch, "input size must be a positive multiple of 8");
  if (in_channels < 1 || dense1_units < 1 || n_classes < 2)
    throw Error(ErrorCode::BadConfig, "channel, unit and class counts must be positive (classes >= 2)");
  for (const int w : widths) {
    if (w < 1) throw Error(ErrorCode::BadConfig, "block widths must be positive");
  }
  for (const double r : {conv_dropout, dense_dropout}) {
    if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::BadConfig, "dropout rate must lie in [0,1)");
  }
}

void MlpConfig::validate() const {
  if (input_features < 1 || hidden_units < 1 || n_classes < 2)
    throw Error(ErrorCode::BadConfig, "mlp sizes must be positive (classes >= 2)");
}

Network::Network(std::vector<int> input_shape, std::vector<std::unique_ptr<Layer>> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  (void)shapes();
}

Network::Network(const Network& other) : input_shape_(other.input_shape_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network tmp(other);
    *this = std::move(tmp);
  }
  return *this;
}

std::vector<std::vector<int>> Network::shapes() const {
  std::vector<std::vector<int>> out{input_shape_};
  for (const auto& l : layers_) out.push_back(l->output_shape(out.back()));
  return out;
}

int Network::n_classes() const { return static_cast<int>(shape_size(shapes().back())); }

Tensor Network::forward(const Tensor& x, Mode mode, Rng& rng) {
  if (x.shape() != input_shape_) throw Error(ErrorCode::ShapeMismatch, "network input shape mismatch");
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h, mode, rng);
  return h;
}

Tensor Network::backward(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<ParamRef> Network::params() {
  std::vector<ParamRef> out;
  for (auto& l : layers_) {
    for (auto& p : l->params()) out.push_back(p);
  }
  return out;
}

void Network::zero_grad() {
  for (auto& p : params()) std::fill(p.grads.begin(), p.grads.end(), 0.0);
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (auto& p : params()) n += p.values.size();
  return n;
}

std::vector<double> Network::flat_parameters() {
  std::vector<double> out;
  for (auto& p : params()) out.insert(out.end(), p.values.begin(), p.values.end());
  return out;
}

void Network::set_flat_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw Error(ErrorCode::ShapeMismatch, "parameter count mismatch");
  std::size_t k = 0;
  for (auto& p : params()) {
    std::copy(values.begin() + k, values.begin() + k + p.values.size(), p.values.begin());
    k += p.values.size();
  }
}

void Network::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& l : layers_) {
    Tensor* w = nullptr;
    std::vector<double>* b = nullptr;
    double fan_in = 0.0;
    if (auto* c = dynamic_cast<Conv2dLayer*>(l.get())) {
      w = &c->weights();
      b = &c->bias();
      fan_in = c->in_channels() * 9.0;
    } else if (auto* d = dynamic_cast<DenseLayer*>(l.get())) {
      w = &d->weights();
      b = &d->bias();
      fan_in = d->in_features();
    } else {
      continue;
    }
    const double bound = std::sqrt(6.0 / fan_in);
    for (auto& v : w->values()) v = rng.uniform(-bound, bound);
    std::fill(b->begin(), b->end(), 0.0);
  }
}

Network build_cnn(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<std::unique_ptr<Layer>> layers;
  int channels = cfg.in_channels;
  for (const int w : cfg.widths) {
    layers.push_back(std::make_unique<Conv2dLayer>(channels, w, Padding::Same));
    layers.push_back(std::make_unique<ReLULayer>());
    layers.push_back(std::make_unique<Conv2dLayer>(w, w, Padding::Same));
    layers.push_back(std::make_unique<ReLULayer>());
    layers.push_back(std::make_unique<MaxPoolLayer>());
    layers.push_back(std::make_unique<DropoutLayer>(cfg.conv_dropout));
    channels = w;
  }
  const int side = cfg.input_size / 8;
  layers.push_back(std::make_unique<FlattenLayer>());
  layers.push_back(std::make_unique<DenseLayer>(channels * side * side, cfg.dense1_units));
  layers.push_back(std::make_unique<ReLULayer>());
  layers.push_back(std::make_unique<DropoutLayer>(cfg.dense_dropout));
  layers.push_back(std::make_unique<DenseLayer>(cfg.dense1_units, cfg.n_classes));
  Network net({cfg.in_channels, cfg.input_size, cfg.input_size}, std::move(layers));
  net.initialize(seed);
  return net;
}

Network build_mlp(const MlpConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(std::make_unique<FlattenLayer>());
  layers.push_back(std::make_unique<DenseLayer>(cfg.input_features, cfg.hidden_units));
  layers.push_back(std::make_unique<ReLULayer>());
  layers.push_back(std::make_unique<DenseLayer>(cfg.hidden_units, cfg.n_classes));
  Network net({cfg.input_features}, std::move(layers));
  net.initialize(seed);
  return net;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

Prediction predict(Network& net, const Tensor& x) {
  if (net.n_layers() == 0) throw Error(ErrorCode::UntrainedModel, "network has no layers");
  Rng unused(0);
  const Tensor logits = net.forward(x, Mode::Infer, unused);
  Prediction p;
  p.label = argmax(logits.values());
  p.probs = softmax(logits);
  return p;
}

void save_checkpoint(Network& net, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(net.input_shape().size()));
  for (const int d : net.input_shape()) put<std::int32_t>(os, d);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(net.n_layers()));
  for (std::size_t i = 0; i < net.n_layers(); ++i) {
    Layer& l = net.layer(i);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(l.kind()));
    if (auto* c = dynamic_cast<Conv2dLayer*>(&l)) {
      put<std::int32_t>(os, c->in_channels());
      put<std::int32_t>(os, c->out_channels());
      put<std::uint32_t>(os, c->padding() == Padding::Same ? 0u : 1u);
    } else if (auto* d = dynamic_cast<DropoutLayer*>(&l)) {
      put<double>(os, d->rate());
    } else if (auto* f = dynamic_cast<DenseLayer*>(&l)) {
      put<std::int32_t>(os, f->in_features());
      put<std::int32_t>(os, f->out_features());
    }
  }
  const auto values = net.flat_parameters();
  put<std::uint64_t>(os, values.size());
  for (const double v : values) put<float>(os, static_cast<float>(v));
  if (!os) throw Error(ErrorCode::IoFailure, "failed writing checkpoint: " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::UntrainedModel, "no checkpoint at " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::UntrainedModel, "not a model checkpoint: " + path.string());
  if (get<std::uint32_t>(is) != kVersion) throw Error(ErrorCode::UntrainedModel, "unsupported checkpoint version");
  const auto rank = get<std::uint32_t>(is);
  if (rank == 0 || rank > 3) throw Error(ErrorCode::IoFailure, "bad input rank in checkpoint");
  std::vector<int> input(rank);
  for (auto& d : input) d = get<std::int32_t>(is);
  const auto n = get<std::uint32_t>(is);
  std::vector<std::unique_ptr<Layer>> layers;
  for (std::uint32_t i = 0; i < n; ++i) {
    switch (static_cast<LayerKind>(get<std::uint32_t>(is))) {
      case LayerKind::Conv2d: {
        const int in = get<std::int32_t>(is), out = get<std::int32_t>(is);
        const auto pad = get<std::uint32_t>(is);
        layers.push_back(std::make_unique<Conv2dLayer>(in, out, pad == 0 ? Padding::Same : Padding::Valid));
        break;
      }
      case LayerKind::ReLU: layers.push_back(std::make_unique<ReLULayer>()); break;
      case LayerKind::MaxPool: layers.push_back(std::make_unique<MaxPoolLayer>()); break;
      case LayerKind::Dropout: layers.push_back(std::make_unique<DropoutLayer>(get<double>(is))); break;
      case LayerKind::Flatten: layers.push_back(std::make_unique<FlattenLayer>()); break;
      case LayerKind::Dense: {
        const int in = get<std::int32_t>(is), out = get<std::int32_t>(is);
        layers.push_back(std::make_unique<DenseLayer>(in, out));
        break;
      }
      default: throw Error(ErrorCode::IoFailure, "unknown layer kind in checkpoint");
    }
  }
  Network net(std::move(input), std::move(layers));
  const auto count = get<std::uint64_t>(is);
  if (count != net.parameter_count()) throw Error(ErrorCode::IoFailure, "checkpoint parameter count mismatch");
  std::vector<double> values(count);
  for (auto& v : values) v = get<float>(is);
  net.set_flat_parameters(values);
  return net;
}

}  // namespace shcnn::nn

#include "shcnn/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "shcnn/error.hpp"
#include "shcnn/kernels.hpp"

namespace shcnn::nn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

// Column matrix for a 3x3 stride-1 correlation: row q = c*9 + ky*3 + kx,
// column p = oy*Wo + ox.
void im2col(const Tensor& x, int pad, int out_h, int out_w, std::vector<double>& col) {
  const int C = x.channels(), H = x.height(), W = x.width();
  const std::size_t hw = static_cast<std::size_t>(out_h) * out_w;
  col.resize(static_cast<std::size_t>(C) * 9 * hw);
  for (int c = 0; c < C; ++c) {
    const double* plane = x.values().data() + static_cast<std::size_t>(c) * H * W;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = col.data() + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
        const int x0 = std::max(0, pad - kx), x1 = std::min(out_w, W + pad - kx);
        for (int oy = 0; oy < out_h; ++oy) {
          double* dst = row + static_cast<std::size_t>(oy) * out_w;
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= H || x1 <= x0) {
            std::fill(dst, dst + out_w, 0.0);
            continue;
          }
          std::fill(dst, dst + x0, 0.0);
          std::copy_n(plane + static_cast<std::size_t>(iy) * W + (x0 + kx - pad), x1 - x0, dst + x0);
          std::fill(dst + x1, dst + out_w, 0.0);
        }
      }
    }
  }
}

void col2im(const std::vector<double>& col, int pad, int out_h, int out_w, Tensor& dx) {
  const int C = dx.channels(), H = dx.height(), W = dx.width();
  const std::size_t hw = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = col.data() + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= H) continue;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox + kx - pad;
            if (ix >= 0 && ix < W) dx.at(c, iy, ix) += row[static_cast<std::size_t>(oy) * out_w + ox];
          }
        }
      }
    }
  }
}

std::pair<int, int> conv_out_size(int h, int w, Padding p) {
  return p == Padding::Same ? std::pair{h, w} : std::pair{h - 2, w - 2};
}

// out[k] = bias[k] + sum_q W[k][q] * col[q]
Tensor correlate(const std::vector<double>& col, const Tensor& weights, std::span<const double> bias, int out_h,
                 int out_w) {
  const int K = weights.shape()[0];
  const int Q = weights.shape()[1];
  const std::size_t hw = static_cast<std::size_t>(out_h) * out_w;
  Tensor out({K, out_h, out_w});
  for (int k = 0; k < K; ++k) {
    auto dst = out.plane(k);
    std::fill(dst.begin(), dst.end(), bias[k]);
  }
  kernels::gemm(static_cast<std::size_t>(K), hw, static_cast<std::size_t>(Q), weights.values().data(),
                static_cast<std::size_t>(Q), col.data(), hw, out.values().data(), hw);
  return out;
}

std::vector<double> transpose(const double* src, std::size_t rows, std::size_t cols) {
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = src[r * cols + c];
  }
  return t;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& kernels, std::span<const double> bias, Padding padding) {
  require(x.rank() == 3, "conv2d input must be (C,H,W)");
  require(kernels.rank() == 2 && kernels.shape()[1] == x.channels() * 9, "conv2d kernels must be {K, C*9}");
  require(bias.size() == static_cast<std::size_t>(kernels.shape()[0]), "conv2d bias length must equal K");
  const auto [oh, ow] = conv_out_size(x.height(), x.width(), padding);
  require(oh >= 1 && ow >= 1, "conv2d input too small for valid padding");
  std::vector<double> col;
  im2col(x, padding == Padding::Same ? 1 : 0, oh, ow, col);
  return correlate(col, kernels, bias, oh, ow);
}

PoolResult maxpool2x2(const Tensor& x) {
  require(x.rank() == 3, "maxpool input must be (C,H,W)");
  const int C = x.channels(), H = x.height(), W = x.width();
  const int oh = (H + 1) / 2, ow = (W + 1) / 2;
  PoolResult r{Tensor({C, oh, ow}), {}};
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (int c = 0; c < C; ++c) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++o) {
        double best = 0.0;
        std::size_t best_idx = 0;
        bool first = true;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int iy = std::min(2 * oy + dy, H - 1), ix = std::min(2 * ox + dx, W - 1);
            const std::size_t idx = (static_cast<std::size_t>(c) * H + iy) * W + ix;
            if (first || x[idx] > best) {
              best = x[idx];
              best_idx = idx;
              first = false;
            }
          }
        }
        r.output[o] = best;
        r.argmax[o] = best_idx;
      }
    }
  }
  return r;
}

Tensor dense(const Tensor& x, const Tensor& weights, std::span<const double> bias) {
  require(weights.rank() == 2, "dense weights must be {out, in}");
  const int out = weights.shape()[0], in = weights.shape()[1];
  require(x.size() == static_cast<std::size_t>(in), "dense input length must equal weight columns");
  require(bias.size() == static_cast<std::size_t>(out), "dense bias length must equal rows");
  Tensor y({out});
  const auto w = weights.values();
  for (int r = 0; r < out; ++r) {
    y[r] = bias[r] + kernels::dot(w.subspan(static_cast<std::size_t>(r) * in, in), x.values());
  }
  return y;
}

Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::BadConfig, "dropout rate must lie in [0,1)");
  if (mode == Mode::Infer || rate == 0.0) return x;
  Tensor y = x;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = rng.uniform() < rate ? 0.0 : y[i] * keep_scale;
  return y;
}

Tensor softmax(const Tensor& logits) {
  Tensor p = logits;
  double m = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) m = std::max(m, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] /= sum;
  return p;
}

SoftmaxLoss softmax_xent(const Tensor& logits, int target) {
  require(logits.size() >= 2, "softmax_xent needs at least two classes");
  require(target >= 0 && static_cast<std::size_t>(target) < logits.size(), "target class out of range");
  double m = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) m = std::max(m, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - m);
  SoftmaxLoss r;
  r.loss = std::log(sum) - (logits[static_cast<std::size_t>(target)] - m);
  r.probs = softmax(logits);
  r.grad = r.probs;
  r.grad[static_cast<std::size_t>(target)] -= 1.0;
  return r;
}

// ---- Conv2dLayer -------------------------------------------------------------

Conv2dLayer::Conv2dLayer(int in_channels, int out_channels, Padding padding)
    : in_(in_channels),
      out_(out_channels),
      padding_(padding),
      weights_({out_channels, in_channels * 9}),
      bias_(static_cast<std::size_t>(out_channels), 0.0),
      weight_grad_({out_channels, in_channels * 9}),
      bias_grad_(static_cast<std::size_t>(out_channels), 0.0) {}

std::vector<int> Conv2dLayer::output_shape(const std::vector<int>& in) const {
  require(in.size() == 3 && in[0] == in_, "conv input channels mismatch");
  const auto [oh, ow] = conv_out_size(in[1], in[2], padding_);
  return {out_, oh, ow};
}

Tensor Conv2dLayer::forward(const Tensor& x, Mode, Rng&) {
  require(x.rank() == 3 && x.channels() == in_, "conv input channels mismatch");
  in_shape_ = x.shape();
  std::tie(out_h_, out_w_) = conv_out_size(x.height(), x.width(), padding_);
  require(out_h_ >= 1 && out_w_ >= 1, "conv input too small");
  im2col(x, padding_ == Padding::Same ? 1 : 0, out_h_, out_w_, col_);
  return correlate(col_, weights_, bias_, out_h_, out_w_);
}

Tensor Conv2dLayer::backward(const Tensor& g) {
  const auto Q = static_cast<std::size_t>(in_) * 9;
  const auto K = static_cast<std::size_t>(out_);
  const std::size_t hw = static_cast<std::size_t>(out_h_) * out_w_;
  for (int k = 0; k < out_; ++k) {
    double s = 0.0;
    for (const double v : g.plane(k)) s += v;
    bias_grad_[k] += s;
  }
  // dW += G * col^T
  const auto gv = g.values();
  auto wg = weight_grad_.values();
  for (std::size_t k = 0; k < K; ++k) {
    const auto gk = gv.subspan(k * hw, hw);
    for (std::size_t q = 0; q < Q; ++q) {
      wg[k * Q + q] += kernels::dot(gk, std::span<const double>(col_.data() + q * hw, hw));
    }
  }
  // dcol = W^T * G
  const auto w_t = transpose(weights_.values().data(), K, Q);
  dcol_.assign(col_.size(), 0.0);
  kernels::gemm(Q, hw, K, w_t.data(), K, gv.data(), hw, dcol_.data(), hw);
  Tensor dx(in_shape_);
  col2im(dcol_, padding_ == Padding::Same ? 1 : 0, out_h_, out_w_, dx);
  return dx;
}

std::vector<ParamRef> Conv2dLayer::params() {
  return {{weights_.values(), weight_grad_.values()}, {bias_, bias_grad_}};
}

// ---- Element-wise and shape layers ----------------------------------------------

Tensor ReLULayer::forward(const Tensor& x, Mode, Rng&) {
  input_ = x;
  Tensor y = x;
  for (auto& v : y.values()) v = v < 0.0 ? 0.0 : v;
  return y;
}

Tensor ReLULayer::backward(const Tensor& g) {
  Tensor dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(input_[i] > 0.0)) dx[i] = 0.0;
  }
  return dx;
}

std::vector<int> MaxPoolLayer::output_shape(const std::vector<int>& in) const {
  require(in.size() == 3, "maxpool input must be (C,H,W)");
  return {in[0], (in[1] + 1) / 2, (in[2] + 1) / 2};
}

Tensor MaxPoolLayer::forward(const Tensor& x, Mode, Rng&) {
  in_shape_ = x.shape();
  auto r = maxpool2x2(x);
  argmax_ = std::move(r.argmax);
  return std::move(r.output);
}

Tensor MaxPoolLayer::backward(const Tensor& g) {
  Tensor dx(in_shape_);
  for (std::size_t i = 0; i < g.size(); ++i) dx[argmax_[i]] += g[i];
  return dx;
}

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::BadConfig, "dropout rate must lie in [0,1)");
}

Tensor DropoutLayer::forward(const Tensor& x, Mode mode, Rng& rng) {
  scale_.assign(x.size(), 1.0);
  if (mode == Mode::Infer || rate_ == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate_);
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) {
    scale_[i] = rng.uniform() < rate_ ? 0.0 : keep_scale;
    y[i] *= scale_[i];
  }
  return y;
}

Tensor DropoutLayer::backward(const Tensor& g) {
  Tensor dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= scale_[i];
  return dx;
}

std::vector<int> FlattenLayer::output_shape(const std::vector<int>& in) const {
  return {static_cast<int>(shape_size(in))};
}

Tensor FlattenLayer::forward(const Tensor& x, Mode, Rng&) {
  in_shape_ = x.shape();
  return x.reshaped({static_cast<int>(x.size())});
}

Tensor FlattenLayer::backward(const Tensor& g) { return g.reshaped(in_shape_); }

// ---- DenseLayer ----------------------------------------------------------------

DenseLayer::DenseLayer(int in_features, int out_features)
    : in_(in_features),
      out_(out_features),
      weights_({out_features, in_features}),
      bias_(static_cast<std::size_t>(out_features), 0.0),
      weight_grad_({out_features, in_features}),
      bias_grad_(static_cast<std::size_t>(out_features), 0.0) {}

std::vector<int> DenseLayer::output_shape(const std::vector<int>& in) const {
  require(shape_size(in) == static_cast<std::size_t>(in_), "dense input length mismatch");
  return {out_};
}

Tensor DenseLayer::forward(const Tensor& x, Mode, Rng&) {
  input_ = x;
  return dense(x, weights_, bias_);
}

Tensor DenseLayer::backward(const Tensor& g) {
  Tensor dx({in_});
  const auto w = weights_.values();
  auto wg = weight_grad_.values();
  for (int r = 0; r < out_; ++r) {
    const double gr = g[static_cast<std::size_t>(r)];
    bias_grad_[r] += gr;
    if (gr == 0.0) continue;
    kernels::axpy(gr, input_.values(), wg.subspan(static_cast<std::size_t>(r) * in_, in_));
    kernels::axpy(gr, w.subspan(static_cast<std::size_t>(r) * in_, in_), dx.values());
  }
  return dx;
}

std::vector<ParamRef> DenseLayer::params() {
  return {{weights_.values(), weight_grad_.values()}, {bias_, bias_grad_}};
}

}  // namespace shcnn::nn

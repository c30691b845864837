#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "doctest.h"
#include "gradcheck.hpp"
#include "shcnn/error.hpp"
#include "shcnn/nn/network.hpp"
#include "shcnn/nn/train.hpp"

using namespace shcnn;
using namespace shcnn::nn;

namespace {

Tensor ones(std::vector<int> shape) { return Tensor(std::move(shape), 1.0); }

// Direct sliding-window correlation with zero padding.
Tensor conv_oracle(const Tensor& x, const Tensor& k, const std::vector<double>& b, int pad) {
  const int C = x.channels(), H = x.height(), W = x.width(), K = k.shape()[0];
  const int oh = H + 2 * pad - 2, ow = W + 2 * pad - 2;
  Tensor out({K, oh, ow});
  for (int o = 0; o < K; ++o)
    for (int y = 0; y < oh; ++y)
      for (int xx = 0; xx < ow; ++xx) {
        double s = b[o];
        for (int c = 0; c < C; ++c)
          for (int dy = 0; dy < 3; ++dy)
            for (int dx = 0; dx < 3; ++dx) {
              const int iy = y + dy - pad, ix = xx + dx - pad;
              if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
              s += k[static_cast<std::size_t>(o) * C * 9 + c * 9 + dy * 3 + dx] * x.at(c, iy, ix);
            }
        out.at(o, y, xx) = s;
      }
  return out;
}

std::vector<Example> constant_toy(int n, int side) {
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    out.push_back({Tensor({1, side, side}, label == 0 ? 0.0 : 1.0), label});
  }
  return out;
}

}  // namespace

TEST_CASE("conv2d: hand examples") {
  const Tensor x = ones({1, 3, 3});
  const Tensor k = ones({1, 9});
  const std::vector<double> b{0.0};
  CHECK(conv2d(x, k, b, Padding::Valid).values()[0] == 9.0);
  const Tensor same = conv2d(x, k, b, Padding::Same);
  const std::vector<double> expect{4, 6, 4, 6, 9, 6, 4, 6, 4};
  CHECK(std::vector<double>(same.values().begin(), same.values().end()) == expect);
  const Tensor z = conv2d(x, Tensor({1, 9}), std::vector<double>{2.5}, Padding::Same);
  for (const double v : z.values()) CHECK(v == 2.5);
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 18}), b, Padding::Same), Error);
}

TEST_CASE("conv2d: matches sliding-window oracle") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const int c = 1 + static_cast<int>(rng.below(3)), k = 1 + static_cast<int>(rng.below(4));
    const Tensor x = gradcheck::random_tensor(rng, {c, 3 + static_cast<int>(rng.below(6)), 3 + static_cast<int>(rng.below(6))});
    const Tensor w = gradcheck::random_tensor(rng, {k, c * 9});
    std::vector<double> b(static_cast<std::size_t>(k));
    for (auto& v : b) v = rng.uniform(-1, 1);
    for (int pad : {0, 1}) {
      const Tensor got = conv2d(x, w, b, pad ? Padding::Same : Padding::Valid);
      const Tensor want = conv_oracle(x, w, b, pad);
      REQUIRE(got.shape() == want.shape());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("maxpool2x2: examples and oracle") {
  const auto r = maxpool2x2(Tensor({1, 2, 2}, std::vector<double>{1, 2, 3, 4}));
  CHECK(r.output.shape() == std::vector<int>{1, 1, 1});
  CHECK(r.output[0] == 4.0);
  const auto c = maxpool2x2(Tensor({2, 4, 6}, 3.0));
  CHECK(c.output.shape() == std::vector<int>{2, 2, 3});
  for (const double v : c.output.values()) CHECK(v == 3.0);

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Tensor x = gradcheck::random_tensor(rng, {2, 4, 4});
    const auto p = maxpool2x2(x);
    for (int ch = 0; ch < 2; ++ch)
      for (int y = 0; y < 2; ++y)
        for (int xx = 0; xx < 2; ++xx) {
          double m = -1e9;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) m = std::max(m, x.at(ch, 2 * y + dy, 2 * xx + dx));
          CHECK(p.output.at(ch, y, xx) == m);
        }
  }
  const auto odd = maxpool2x2(Tensor({1, 3, 3}, std::vector<double>{0, 0, 1, 0, 0, 0, 0, 0, 7}));
  CHECK(odd.output.shape() == std::vector<int>{1, 2, 2});
  CHECK(odd.output.at(0, 0, 1) == 1.0);
  CHECK(odd.output.at(0, 1, 1) == 7.0);
}

TEST_CASE("dense: examples and oracle") {
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye[static_cast<std::size_t>(i * 3 + i)] = 1.0;
  const Tensor x({3}, std::vector<double>{1.5, -2, 4});
  const Tensor y = dense(x, eye, std::vector<double>{0, 0, 0});
  CHECK(std::vector<double>(y.values().begin(), y.values().end()) == std::vector<double>{1.5, -2, 4});
  const Tensor b = dense(Tensor({2}, 5.0), Tensor({2, 2}), std::vector<double>{1, 2});
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 2.0);

  Rng rng(3);
  const Tensor in = gradcheck::random_tensor(rng, {5});
  const Tensor w = gradcheck::random_tensor(rng, {3, 5});
  const std::vector<double> bias{0.1, 0.2, 0.3};
  const Tensor out = dense(in, w, bias);
  for (int r = 0; r < 3; ++r) {
    double s = bias[static_cast<std::size_t>(r)];
    for (int c = 0; c < 5; ++c) s += w[static_cast<std::size_t>(r * 5 + c)] * in[static_cast<std::size_t>(c)];
    CHECK(out[static_cast<std::size_t>(r)] == doctest::Approx(s).epsilon(1e-12));
  }
  CHECK_THROWS_AS(dense(Tensor({4}), w, bias), Error);
}

TEST_CASE("dropout: identity cases and expectation") {
  Rng rng(1);
  const Tensor x = gradcheck::random_tensor(rng, {100});
  const Tensor a = dropout(x, 0.0, Mode::Train, rng);
  const Tensor b = dropout(x, 0.7, Mode::Infer, rng);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(a[i] == x[i]);
    CHECK(b[i] == x[i]);
  }
  const Tensor big({100000}, 2.0);
  const Tensor d = dropout(big, 0.5, Mode::Train, rng);
  double mean = 0.0;
  for (const double v : d.values()) mean += v;
  mean /= static_cast<double>(d.size());
  CHECK(std::abs(mean - 2.0) < 0.02 * 2.0);
  CHECK_THROWS_AS(dropout(x, 1.0, Mode::Train, rng), Error);
}

TEST_CASE("softmax_xent: examples, stability and gradient") {
  const auto u = softmax_xent(Tensor({3}, 0.0), 1);
  for (const double p : u.probs.values()) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(u.loss == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  const auto big = softmax_xent(Tensor({2}, std::vector<double>{1000, 0}), 0);
  CHECK(std::isfinite(big.loss));
  CHECK(big.loss == doctest::Approx(0.0));

  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    Tensor z = gradcheck::random_tensor(rng, {4});
    for (auto& v : z.values()) v *= 5;
    const int target = static_cast<int>(rng.below(4));
    const auto sl = softmax_xent(z, target);
    double sum = 0.0;
    for (const double p : sl.probs.values()) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-12);
    std::vector<double> numeric(4), analytic(sl.grad.values().begin(), sl.grad.values().end());
    for (std::size_t i = 0; i < 4; ++i) {
      Tensor up = z, down = z;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      numeric[i] = (softmax_xent(up, target).loss - softmax_xent(down, target).loss) / 2e-5;
    }
    CHECK(gradcheck::relative_error(analytic, numeric) < 1e-6);

    Tensor shifted = z;
    const double c = rng.uniform(-50, 50);
    for (auto& v : shifted.values()) v += c;
    const Tensor p1 = softmax(z), p2 = softmax(shifted);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(p1[i] - p2[i]) < 1e-12);
  }
}

TEST_CASE("gradient check: every layer kind, 20 instances each") {
  Rng rng(2024);
  for (int t = 0; t < 20; ++t) {
    for (auto& c : gradcheck::layer_cases(rng)) {
      CAPTURE(c.name);
      const auto r = gradcheck::check_layer(*c.layer, c.in_shape, rng.next());
      CHECK(r.input_error < 1e-4);
      CHECK(r.param_error < 1e-4);
    }
  }
}

TEST_CASE("network: shape law and output length") {
  NetworkConfig cfg;
  Network net = build_cnn(cfg, 1);
  const auto shapes = net.shapes();
  // index of the flatten input
  std::size_t flat = 0;
  for (std::size_t i = 0; i < net.n_layers(); ++i)
    if (net.layer(i).kind() == LayerKind::Flatten) flat = i;
  CHECK(shapes[flat] == std::vector<int>{64, 8, 8});
  CHECK(shapes.back() == std::vector<int>{3});

  NetworkConfig small;
  small.input_size = 16;
  small.widths = {2, 3, 4};
  small.dense1_units = 5;
  Network s = build_cnn(small, 1);
  Rng rng(4);
  const Tensor x = gradcheck::random_tensor(rng, {1, 16, 16});
  const Tensor a = s.forward(x, Mode::Infer, rng), b = s.forward(x, Mode::Infer, rng);
  CHECK(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK_THROWS_AS(s.forward(Tensor({1, 8, 8}), Mode::Infer, rng), Error);

  small.input_size = 20;
  CHECK_THROWS_AS(build_cnn(small, 1), Error);
}

TEST_CASE("network: whole-stack gradient check") {
  NetworkConfig cfg;
  cfg.input_size = 8;
  cfg.widths = {2, 2, 3};
  cfg.dense1_units = 4;
  cfg.conv_dropout = 0.0;
  cfg.dense_dropout = 0.0;
  Network net = build_cnn(cfg, 3);
  Rng rng(8);
  Tensor x = gradcheck::random_tensor(rng, {1, 8, 8});
  Rng dummy(0);
  auto loss = [&] { return softmax_xent(net.forward(x, Mode::Train, dummy), 2).loss; };
  net.zero_grad();
  net.backward(softmax_xent(net.forward(x, Mode::Train, dummy), 2).grad);
  std::vector<double> analytic, numeric;
  for (auto& p : net.params()) {
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      analytic.push_back(p.grads[i]);
      const double keep = p.values[i];
      p.values[i] = keep + 1e-5;
      const double up = loss();
      p.values[i] = keep - 1e-5;
      const double down = loss();
      p.values[i] = keep;
      numeric.push_back((up - down) / 2e-5);
    }
  }
  CHECK(gradcheck::relative_error(analytic, numeric) < 1e-4);
}

TEST_CASE("predict: argmax tie rule") {
  CHECK(argmax(std::vector<double>{2, 1, 1}) == 0);
  CHECK(argmax(std::vector<double>{1, 1, 1}) == 0);
  CHECK(argmax(std::vector<double>{0, 3, 3}) == 1);
  Rng rng(6);
  Network mlp = build_mlp({12, 6, 3}, 7);
  for (int t = 0; t < 20; ++t) {
    const Tensor x = gradcheck::random_tensor(rng, {12});
    const auto p = predict(mlp, x);
    CHECK(p.label == argmax(p.probs.values()));
  }
}

TEST_CASE("train: toy set, zero learning rate, determinism, errors") {
  NetworkConfig cfg;
  cfg.input_size = 8;
  cfg.n_classes = 2;
  const auto data = constant_toy(40, 8);

  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 8;
  tc.seed = 17;
  Network net = build_cnn(cfg, 5);
  const auto res = train(net, data, {}, tc);
  CHECK(res.best_val_acc == 1.0);
  CHECK(evaluate_accuracy(net, data) == 1.0);

  Network frozen = build_cnn(cfg, 5);
  const auto before = frozen.flat_parameters();
  TrainConfig zero = tc;
  zero.learning_rate = 0.0;
  zero.optimizer = Optimizer::Sgd;
  train(frozen, data, data, zero);
  CHECK(frozen.flat_parameters() == before);
  zero.optimizer = Optimizer::Adam;
  train(frozen, data, data, zero);
  CHECK(frozen.flat_parameters() == before);

  Network a = build_cnn(cfg, 5), b = build_cnn(cfg, 5);
  const auto ha = train(a, data, data, tc), hb = train(b, data, data, tc);
  CHECK(format_history_csv(ha.history) == format_history_csv(hb.history));
  CHECK(a.flat_parameters() == b.flat_parameters());

  std::vector<Example> one_class(data.begin(), data.end());
  for (auto& e : one_class) e.label = 0;
  Network c = build_cnn(cfg, 5);
  CHECK_THROWS_WITH_AS(train(c, one_class, {}, tc), doctest::Contains("EmptyClass"), Error);

  auto poisoned = data;
  poisoned[3].x[0] = std::numeric_limits<double>::infinity();
  Network d = build_cnn(cfg, 5);
  CHECK_THROWS_WITH_AS(train(d, poisoned, {}, tc), doctest::Contains("DivergenceDetected"), Error);
}

TEST_CASE("train: mlp on a separable problem and history csv") {
  std::vector<Example> data;
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    const int label = i % 3;
    Tensor x({4});
    for (auto& v : x.values()) v = rng.uniform(-0.2, 0.2);
    x[static_cast<std::size_t>(label)] += 1.0;
    data.push_back({x, label});
  }
  Network mlp = build_mlp({4, 8, 3}, 2);
  TrainConfig tc;
  tc.epochs = 60;
  tc.learning_rate = 1e-2;
  tc.batch_size = 10;
  const auto res = train(mlp, data, data, tc);
  CHECK(res.best_val_acc == 1.0);
  const std::string csv = format_history_csv(res.history);
  CHECK(csv.rfind("epoch,train_acc,val_acc,loss\n", 0) == 0);
}

TEST_CASE("checkpoint: round trip at float precision") {
  NetworkConfig cfg;
  cfg.input_size = 16;
  cfg.widths = {2, 3, 4};
  cfg.dense1_units = 5;
  Network net = build_cnn(cfg, 21);
  const auto path = std::filesystem::temp_directory_path() / "shcnn_ckpt_test.bin";
  save_checkpoint(net, path);
  Network back = load_checkpoint(path);
  CHECK(back.shapes() == net.shapes());
  const auto a = net.flat_parameters(), b = back.flat_parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == static_cast<double>(static_cast<float>(a[i])));
  std::filesystem::remove(path);
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("UntrainedModel"), Error);
}

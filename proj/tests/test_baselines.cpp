#include <cmath>
#include <vector>

#include "doctest.h"
#include "shcnn/baselines.hpp"
#include "shcnn/error.hpp"

using namespace shcnn;

namespace {

FeatureMatrix matrix(int d, std::vector<std::vector<double>> rows, std::vector<int> labels) {
  FeatureMatrix X;
  X.n_samples = static_cast<int>(rows.size());
  X.n_features = d;
  for (const auto& r : rows) X.values.insert(X.values.end(), r.begin(), r.end());
  X.labels = std::move(labels);
  return X;
}

// Two Gaussian-ish blobs separated along the diagonal.
FeatureMatrix blobs(Rng& rng, int n, double gap) {
  FeatureMatrix X;
  X.n_features = 2;
  for (int i = 0; i < n; ++i) {
    const int c = i % 2;
    const double cx = c ? 0.5 + gap / 2 : 0.5 - gap / 2;
    X.values.push_back(std::clamp(cx + rng.uniform(-0.1, 0.1), 0.0, 1.0));
    X.values.push_back(std::clamp(cx + rng.uniform(-0.1, 0.1), 0.0, 1.0));
    X.labels.push_back(c);
  }
  X.n_samples = n;
  return X;
}

double train_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  int hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

double train_value(const SvcModel& m, const BinarySvm& p, int i) {
  double s = -p.rho;
  for (std::size_t v = 0; v < p.support.size(); ++v) s += p.coef[v] * m.kernel(m.train_row(p.support[v]), m.train_row(i));
  return s;
}

}  // namespace

TEST_CASE("features: flattened and normalized") {
  std::vector<LabeledPatch> ps{{GrayImage(2, 2, 255), 1}, {GrayImage(2, 2, 0), 0}};
  const auto X = make_features(ps);
  CHECK(X.n_samples == 2);
  CHECK(X.n_features == 4);
  CHECK(X.values[0] == 1.0);
  CHECK(X.values[7] == 0.0);
  CHECK(X.labels == std::vector<int>{1, 0});
  CHECK_THROWS_AS(make_features({}), Error);
}

TEST_CASE("rfc: single class, determinism, empty data") {
  Rng rng(1);
  auto X = blobs(rng, 40, 0.4);
  auto single = X;
  for (auto& l : single.labels) l = 2;
  const auto f = train_rfc(single, {});
  for (const int p : f.predict(X)) CHECK(p == 2);

  RfcConfig cfg;
  cfg.n_trees = 15;
  cfg.seed = 9;
  CHECK(train_rfc(X, cfg).predict(X) == train_rfc(X, cfg).predict(X));
  CHECK_THROWS_WITH_AS(train_rfc(FeatureMatrix{}, cfg), doctest::Contains("EmptyData"), Error);
}

TEST_CASE("rfc: unbagged single tree reproduces the exhaustive best stump") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> xs(4);
    for (auto& x : xs) x = std::round(rng.uniform() * 20) / 20;
    // separable: label by the rank of a random cut point
    const double cut = rng.uniform(0.0, 1.0);
    std::vector<int> ys;
    for (const double x : xs) ys.push_back(x <= cut ? 0 : 1);
    FeatureMatrix X = matrix(1, {{xs[0]}, {xs[1]}, {xs[2]}, {xs[3]}}, ys);
    if (X.n_classes() < 2 || std::count(ys.begin(), ys.end(), 0) == 0) continue;

    // exhaustive search over midpoints between distinct sorted values
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double best_imp = 1e9, best_thr = 0;
    for (int i = 0; i + 1 < 4; ++i) {
      if (sorted[i] == sorted[i + 1]) continue;
      const double thr = (sorted[i] + sorted[i + 1]) / 2;
      double imp = 0;
      for (int side = 0; side < 2; ++side) {
        int n = 0, c1 = 0;
        for (int k = 0; k < 4; ++k)
          if ((xs[k] <= thr) == (side == 0)) ++n, c1 += ys[k];
        if (n) imp += n * (1.0 - std::pow(double(c1) / n, 2) - std::pow(double(n - c1) / n, 2));
      }
      if (imp < best_imp - 1e-12) best_imp = imp, best_thr = thr;
    }
    RfcConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    const auto f = train_rfc(X, cfg);
    REQUIRE(f.trees[0].nodes.size() >= 3);
    CHECK(f.trees[0].nodes[0].feature == 0);
    CHECK(f.trees[0].nodes[0].threshold == doctest::Approx(best_thr));
    CHECK(f.predict(X) == ys);
  }
}

TEST_CASE("rfc: more trees reduce accuracy variance across seeds") {
  Rng rng(5);
  FeatureMatrix train = blobs(rng, 120, 0.1), test = blobs(rng, 200, 0.1);
  auto spread = [&](int n_trees) {
    std::vector<double> accs;
    for (int s = 0; s < 10; ++s) {
      RfcConfig cfg;
      cfg.n_trees = n_trees;
      cfg.seed = static_cast<std::uint64_t>(s);
      accs.push_back(train_accuracy(train_rfc(train, cfg).predict(test), test.labels));
    }
    double m = 0;
    for (double a : accs) m += a;
    m /= 10;
    double v = 0;
    for (double a : accs) v += (a - m) * (a - m);
    return std::sqrt(v / 9);
  };
  CHECK(spread(100) < spread(1));
}

TEST_CASE("svc: separable set and KKT conditions") {
  Rng rng(7);
  const auto X = blobs(rng, 60, 0.5);
  for (auto kernel : {KernelType::Linear, KernelType::Rbf}) {
    SvcConfig cfg;
    cfg.kernel = kernel;
    cfg.C = 100.0;
    const auto m = train_svc(X, cfg);
    CHECK(m.converged);
    CHECK(train_accuracy(m.predict(X), X.labels) == 1.0);
  }
  // KKT scan on an overlapping set so that all three alpha regimes occur
  const auto Y = blobs(rng, 80, 0.05);
  for (auto kernel : {KernelType::Linear, KernelType::Rbf}) {
    SvcConfig cfg;
    cfg.kernel = kernel;
    cfg.C = 1.0;
    const auto m = train_svc(Y, cfg);
    REQUIRE(m.converged);
    const auto& p = m.problems[0];
    const double tol = 2 * cfg.tolerance;
    for (int i = 0; i < Y.n_samples; ++i) {
      const double yf = p.y[static_cast<std::size_t>(i)] * train_value(m, p, i);
      const double a = p.alpha[static_cast<std::size_t>(i)];
      if (a <= 0.0) CHECK(yf >= 1.0 - tol);
      else if (a >= cfg.C) CHECK(yf <= 1.0 + tol);
      else CHECK(std::abs(yf - 1.0) <= tol);
    }
  }
}

TEST_CASE("svc: XOR separates only with the RBF kernel") {
  const auto X = matrix(2, {{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 0, 1, 1});
  CHECK(train_accuracy(train_svc_linear(X, 1.0).predict(X), X.labels) <= 0.75);
  CHECK(train_accuracy(train_svc_rbf(X, 10.0, 1.0).predict(X), X.labels) == 1.0);
}

TEST_CASE("svc: duplicating every point keeps the decision function") {
  Rng rng(13);
  const auto X = blobs(rng, 30, 0.5);
  FeatureMatrix D = X;
  D.values.insert(D.values.end(), X.values.begin(), X.values.end());
  D.labels.insert(D.labels.end(), X.labels.begin(), X.labels.end());
  D.n_samples *= 2;
  for (auto kernel : {KernelType::Linear, KernelType::Rbf}) {
    SvcConfig cfg;
    cfg.kernel = kernel;
    cfg.C = 1000.0;
    cfg.gamma = 2.0;
    cfg.tolerance = 1e-9;
    const auto a = train_svc(X, cfg), b = train_svc(D, cfg);
    for (int t = 0; t < 50; ++t) {
      const std::vector<double> q{rng.uniform(), rng.uniform()};
      CHECK(std::abs(a.decision(q)[1] - b.decision(q)[1]) < 1e-6);
    }
  }
}

TEST_CASE("svc: multiclass one-vs-rest, default gamma, errors") {
  Rng rng(17);
  FeatureMatrix X;
  X.n_features = 2;
  for (int i = 0; i < 90; ++i) {
    const int c = i % 3;
    X.values.push_back(0.2 + 0.3 * c + rng.uniform(-0.05, 0.05));
    X.values.push_back(rng.uniform());
    X.labels.push_back(c);
  }
  X.n_samples = 90;
  SvcConfig cfg;
  cfg.kernel = KernelType::Rbf;
  cfg.C = 10;
  const auto m = train_svc(X, cfg);
  CHECK(m.problems.size() == 3);
  CHECK(m.gamma == doctest::Approx(default_gamma(X)));
  CHECK(train_accuracy(m.predict(X), X.labels) >= 0.95);

  auto one = X;
  for (auto& l : one.labels) l = 0;
  CHECK_THROWS_WITH_AS(train_svc(one, cfg), doctest::Contains("EmptyClass"), Error);
  cfg.C = 0;
  CHECK_THROWS_AS(train_svc(X, cfg), Error);

  SvcConfig tight;
  tight.max_iterations = 1;
  const auto partial = train_svc(X, tight);
  CHECK_FALSE(partial.converged);
  tight.throw_on_nonconvergence = true;
  CHECK_THROWS_WITH_AS(train_svc(X, tight), doctest::Contains("NonConvergence"), Error);
}

TEST_CASE("mlp: toy set, zero learning rate") {
  FeatureMatrix X;
  X.n_features = 16;
  for (int i = 0; i < 40; ++i) {
    X.values.insert(X.values.end(), 16, i % 2 ? 1.0 : 0.0);
    X.labels.push_back(i % 2);
  }
  X.n_samples = 40;
  nn::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  auto m = train_mlp(X, 100, cfg);
  CHECK(train_accuracy(m.predict(X), X.labels) == 1.0);

  cfg.learning_rate = 0.0;
  auto frozen = train_mlp(X, 100, cfg);
  auto initial = nn::build_mlp({16, 100, 2}, derive_seed(cfg.seed, 0xA11));
  CHECK(frozen.net.flat_parameters() == initial.flat_parameters());
  CHECK_THROWS_AS(train_mlp(X, 0, cfg), Error);
}

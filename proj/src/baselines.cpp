#include "shcnn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shcnn/error.hpp"
#include "shcnn/kernels.hpp"

namespace shcnn {

int FeatureMatrix::n_classes() const {
  int m = -1;
  for (const int l : labels) m = std::max(m, l);
  return m + 1;
}

void FeatureMatrix::validate() const {
  if (n_samples < 1 || n_features < 1) throw Error(ErrorCode::EmptyData, "feature matrix is empty");
  if (values.size() != static_cast<std::size_t>(n_samples) * n_features ||
      labels.size() != static_cast<std::size_t>(n_samples))
    throw Error(ErrorCode::ShapeMismatch, "feature matrix dimensions disagree with its data");
  for (const int l : labels) {
    if (l < 0) throw Error(ErrorCode::BadConfig, "negative class label");
  }
}

FeatureMatrix make_features(std::span<const LabeledPatch> patches) {
  if (patches.empty()) throw Error(ErrorCode::EmptyData, "no patches to featurize");
  FeatureMatrix X;
  X.n_samples = static_cast<int>(patches.size());
  X.n_features = patches[0].image.width() * patches[0].image.height();
  X.values.reserve(static_cast<std::size_t>(X.n_samples) * X.n_features);
  for (const auto& p : patches) {
    if (p.image.width() * p.image.height() != X.n_features)
      throw Error(ErrorCode::ShapeMismatch, "patches differ in size");
    for (const auto v : p.image.pixels()) X.values.push_back(v / 255.0);
    X.labels.push_back(p.label);
  }
  return X;
}

// ---- Random forest ----------------------------------------------------------

namespace {

int majority(std::span<const int> counts) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

double gini(std::span<const int> counts, int total) {
  if (total == 0) return 0.0;
  double s = 0.0;
  for (const int c : counts) s += static_cast<double>(c) * c;
  return 1.0 - s / (static_cast<double>(total) * total);
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& X, const RfcConfig& cfg, int n_classes, Rng& rng)
      : X_(X), cfg_(cfg), k_(n_classes), rng_(rng) {
    mtry_ = cfg.max_features > 0 ? std::min(cfg.max_features, X.n_features)
                                 : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(X.n_features))));
    features_.resize(static_cast<std::size_t>(X.n_features));
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree build(std::vector<int> samples) {
    DecisionTree tree;
    grow(tree, samples);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  int grow(DecisionTree& tree, std::vector<int>& samples) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::vector<int> counts(static_cast<std::size_t>(k_), 0);
    for (const int s : samples) ++counts[static_cast<std::size_t>(X_.labels[static_cast<std::size_t>(s)])];
    tree.nodes[static_cast<std::size_t>(id)].label = majority(counts);
    const int n = static_cast<int>(samples.size());
    const bool pure = std::count(counts.begin(), counts.end(), 0) >= k_ - 1;
    if (pure || n < 2 * cfg_.min_leaf) return id;

    const Split split = best_split(samples, counts);
    if (split.feature < 0) return id;

    std::vector<int> left, right;
    for (const int s : samples) {
      (X_.row(s)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(tree, left);
    const int r = grow(tree, right);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Examines random features until mtry non-constant ones were scored.
  Split best_split(const std::vector<int>& samples, const std::vector<int>& counts) {
    const int n = static_cast<int>(samples.size());
    Split best;
    const double parent = gini(counts, n);
    std::vector<std::pair<double, int>> column(samples.size());
    std::vector<int> lc(static_cast<std::size_t>(k_)), rc(static_cast<std::size_t>(k_));
    int scored = 0;
    for (int f = 0; f < X_.n_features && scored < mtry_; ++f) {
      const auto pick = f + static_cast<int>(rng_.below(static_cast<std::uint64_t>(X_.n_features - f)));
      std::swap(features_[static_cast<std::size_t>(f)], features_[static_cast<std::size_t>(pick)]);
      const int feat = features_[static_cast<std::size_t>(f)];
      for (std::size_t i = 0; i < samples.size(); ++i) {
        column[i] = {X_.row(samples[i])[static_cast<std::size_t>(feat)], X_.labels[static_cast<std::size_t>(samples[i])]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;
      std::fill(lc.begin(), lc.end(), 0);
      rc = counts;
      for (int i = 0; i + 1 < n; ++i) {
        ++lc[static_cast<std::size_t>(column[static_cast<std::size_t>(i)].second)];
        --rc[static_cast<std::size_t>(column[static_cast<std::size_t>(i)].second)];
        const double a = column[static_cast<std::size_t>(i)].first, b = column[static_cast<std::size_t>(i) + 1].first;
        if (a == b) continue;
        const int nl = i + 1, nr = n - nl;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        const double imp = (nl * gini(lc, nl) + nr * gini(rc, nr)) / n;
        if (imp < best.impurity) {
          best.impurity = imp;
          best.feature = feat;
          best.threshold = a + (b - a) / 2.0;
          if (best.threshold >= b) best.threshold = a;
        }
      }
    }
    if (best.feature >= 0 && !(best.impurity < parent)) best.feature = -1;
    return best;
  }

  const FeatureMatrix& X_;
  const RfcConfig& cfg_;
  int k_;
  Rng& rng_;
  int mtry_;
  std::vector<int> features_;
};

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].label;
}

int RandomForest::predict(std::span<const double> x) const {
  if (trees.empty()) throw Error(ErrorCode::UntrainedModel, "forest has no trees");
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(x))];
  return majority(votes);
}

std::vector<int> RandomForest::predict(const FeatureMatrix& X) const {
  std::vector<int> out;
  for (int i = 0; i < X.n_samples; ++i) out.push_back(predict(X.row(i)));
  return out;
}

RandomForest train_rfc(const FeatureMatrix& X, const RfcConfig& cfg) {
  X.validate();
  if (cfg.n_trees < 1 || cfg.min_leaf < 1) throw Error(ErrorCode::BadConfig, "n_trees and min_leaf must be >= 1");
  RandomForest forest;
  forest.n_classes = X.n_classes();
  for (int t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> samples(static_cast<std::size_t>(X.n_samples));
    if (cfg.bootstrap) {
      for (auto& s : samples) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(X.n_samples)));
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    TreeBuilder builder(X, cfg, forest.n_classes, rng);
    forest.trees.push_back(builder.build(std::move(samples)));
  }
  return forest;
}

// ---- Support vector classifier ------------------------------------------------

namespace {

constexpr double kTau = 1e-12;

// Dual solver for min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0 with
// Q_ij = y_i y_j K_ij. Working pairs use second-order selection.
BinarySvm solve_binary(const std::vector<double>& K, int n, std::vector<int> y, const SvcConfig& cfg) {
  BinarySvm m;
  m.y = std::move(y);
  m.alpha.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> G(static_cast<std::size_t>(n), -1.0);
  const double C = cfg.C;
  auto& a = m.alpha;
  const auto& Y = m.y;
  auto k = [&](int i, int j) { return K[static_cast<std::size_t>(i) * n + j]; };
  auto upper = [&](int i) { return a[static_cast<std::size_t>(i)] >= C; };
  auto lower = [&](int i) { return a[static_cast<std::size_t>(i)] <= 0.0; };

  m.converged = false;
  while (m.iterations < cfg.max_iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    int i = -1;
    for (int t = 0; t < n; ++t) {
      const double g = G[static_cast<std::size_t>(t)];
      if (Y[static_cast<std::size_t>(t)] == 1) {
        if (!upper(t) && -g > gmax) gmax = -g, i = t;
      } else if (!lower(t) && g > gmax) {
        gmax = g, i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    int j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      const int yi = Y[static_cast<std::size_t>(i)];
      for (int t = 0; t < n; ++t) {
        const double g = G[static_cast<std::size_t>(t)];
        const int yt = Y[static_cast<std::size_t>(t)];
        const double qit = yi * yt * k(i, t);
        double diff = 0.0, quad = 0.0;
        if (yt == 1) {
          if (lower(t)) continue;
          gmax2 = std::max(gmax2, g);
          diff = gmax + g;
          quad = k(i, i) + k(t, t) - 2.0 * yi * qit;
        } else {
          if (upper(t)) continue;
          gmax2 = std::max(gmax2, -g);
          diff = gmax - g;
          quad = k(i, i) + k(t, t) + 2.0 * yi * qit;
        }
        if (diff > 0.0) {
          const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (obj < best_obj) best_obj = obj, j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < cfg.tolerance) {
      m.converged = true;
      break;
    }
    ++m.iterations;

    const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
    const double qij = Y[si] * Y[sj] * k(i, j);
    const double old_ai = a[si], old_aj = a[sj];
    if (Y[si] != Y[sj]) {
      double quad = k(i, i) + k(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[si] - G[sj]) / quad;
      const double diff = a[si] - a[sj];
      a[si] += delta;
      a[sj] += delta;
      if (diff > 0.0) {
        if (a[sj] < 0.0) a[sj] = 0.0, a[si] = diff;
      } else if (a[si] < 0.0) {
        a[si] = 0.0, a[sj] = -diff;
      }
      if (diff > 0.0) {
        if (a[si] > C) a[si] = C, a[sj] = C - diff;
      } else if (a[sj] > C) {
        a[sj] = C, a[si] = C + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[si] - G[sj]) / quad;
      const double sum = a[si] + a[sj];
      a[si] -= delta;
      a[sj] += delta;
      if (sum > C) {
        if (a[si] > C) a[si] = C, a[sj] = sum - C;
      } else if (a[sj] < 0.0) {
        a[sj] = 0.0, a[si] = sum;
      }
      if (sum > C) {
        if (a[sj] > C) a[sj] = C, a[si] = sum - C;
      } else if (a[si] < 0.0) {
        a[si] = 0.0, a[sj] = sum;
      }
    }
    const double dai = a[si] - old_ai, daj = a[sj] - old_aj;
    for (int t = 0; t < n; ++t) {
      const auto st = static_cast<std::size_t>(t);
      G[st] += Y[st] * (Y[si] * k(i, t) * dai + Y[sj] * k(j, t) * daj);
    }
  }

  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
  int n_free = 0;
  for (int t = 0; t < n; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const double yg = Y[st] * G[st];
    if (upper(t)) {
      if (Y[st] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (Y[st] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  m.rho = n_free > 0 ? free_sum / n_free : (ub + lb) / 2.0;
  for (int t = 0; t < n; ++t) {
    if (a[static_cast<std::size_t>(t)] > 0.0) {
      m.support.push_back(t);
      m.coef.push_back(a[static_cast<std::size_t>(t)] * Y[static_cast<std::size_t>(t)]);
    }
  }
  return m;
}

}  // namespace

double default_gamma(const FeatureMatrix& X) {
  const double n = static_cast<double>(X.values.size());
  double mean = 0.0;
  for (const double v : X.values) mean += v;
  mean /= n;
  double var = 0.0;
  for (const double v : X.values) var += (v - mean) * (v - mean);
  var /= n;
  return var > 0.0 ? 1.0 / (X.n_features * var) : 1.0;
}

std::span<const double> SvcModel::train_row(int i) const {
  return {train_values.data() + static_cast<std::size_t>(i) * n_features, static_cast<std::size_t>(n_features)};
}

double SvcModel::kernel(std::span<const double> a, std::span<const double> b) const {
  if (config.kernel == KernelType::Linear) return kernels::dot(a, b);
  return std::exp(-gamma * kernels::squared_distance(a, b));
}

std::vector<double> SvcModel::decision(std::span<const double> x) const {
  if (problems.empty()) throw Error(ErrorCode::UntrainedModel, "svc has no trained problems");
  if (x.size() != static_cast<std::size_t>(n_features)) throw Error(ErrorCode::ShapeMismatch, "feature length mismatch");
  std::vector<double> f;
  for (const auto& p : problems) {
    double s = -p.rho;
    if (config.kernel == KernelType::Linear) {
      s += kernels::dot(p.linear_w, x);
    } else {
      for (std::size_t v = 0; v < p.support.size(); ++v) s += p.coef[v] * kernel(train_row(p.support[v]), x);
    }
    f.push_back(s);
  }
  if (n_classes == 2) return {-f[0], f[0]};
  return f;
}

int SvcModel::predict(std::span<const double> x) const {
  const auto f = decision(x);
  int best = 0;
  for (int c = 1; c < static_cast<int>(f.size()); ++c) {
    if (f[static_cast<std::size_t>(c)] > f[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

std::vector<int> SvcModel::predict(const FeatureMatrix& X) const {
  std::vector<int> out;
  for (int i = 0; i < X.n_samples; ++i) out.push_back(predict(X.row(i)));
  return out;
}

SvcModel train_svc(const FeatureMatrix& X, const SvcConfig& cfg) {
  X.validate();
  if (!(cfg.C > 0.0)) throw Error(ErrorCode::BadConfig, "C must be > 0");
  if (cfg.gamma < 0.0) throw Error(ErrorCode::BadConfig, "gamma must be > 0");
  if (!(cfg.tolerance > 0.0) || cfg.max_iterations < 1) throw Error(ErrorCode::BadConfig, "bad SMO stopping rule");
  SvcModel model;
  model.config = cfg;
  model.n_classes = X.n_classes();
  model.n_features = X.n_features;
  model.train_values = X.values;
  model.gamma = cfg.kernel == KernelType::Rbf ? (cfg.gamma > 0.0 ? cfg.gamma : default_gamma(X)) : 0.0;
  std::vector<int> present(static_cast<std::size_t>(model.n_classes), 0);
  for (const int l : X.labels) present[static_cast<std::size_t>(l)] = 1;
  for (int c = 0; c < model.n_classes; ++c) {
    if (!present[static_cast<std::size_t>(c)])
      throw Error(ErrorCode::EmptyClass, "no training sample for class " + std::to_string(c));
  }
  if (model.n_classes < 2) throw Error(ErrorCode::EmptyClass, "svc needs at least two classes");

  const int n = X.n_samples;
  std::vector<double> K(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = model.kernel(X.row(i), X.row(j));
      K[static_cast<std::size_t>(i) * n + j] = v;
      K[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  const int n_problems = model.n_classes == 2 ? 1 : model.n_classes;
  for (int c = 0; c < n_problems; ++c) {
    const int positive = model.n_classes == 2 ? 1 : c;
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = X.labels[static_cast<std::size_t>(i)] == positive ? 1 : -1;
    BinarySvm p = solve_binary(K, n, std::move(y), cfg);
    if (cfg.kernel == KernelType::Linear) {
      p.linear_w.assign(static_cast<std::size_t>(X.n_features), 0.0);
      for (std::size_t v = 0; v < p.support.size(); ++v) kernels::axpy(p.coef[v], X.row(p.support[v]), p.linear_w);
    }
    model.converged = model.converged && p.converged;
    model.problems.push_back(std::move(p));
  }
  if (!model.converged && cfg.throw_on_nonconvergence)
    throw Error(ErrorCode::NonConvergence, "SMO hit the iteration limit before reaching the KKT tolerance");
  return model;
}

SvcModel train_svc_linear(const FeatureMatrix& X, double C) {
  SvcConfig cfg;
  cfg.kernel = KernelType::Linear;
  cfg.C = C;
  return train_svc(X, cfg);
}

SvcModel train_svc_rbf(const FeatureMatrix& X, double C, double gamma) {
  SvcConfig cfg;
  cfg.kernel = KernelType::Rbf;
  cfg.C = C;
  cfg.gamma = gamma;
  return train_svc(X, cfg);
}

// ---- MLP ------------------------------------------------------------------------

namespace {

std::vector<nn::Example> to_examples(const FeatureMatrix& X) {
  std::vector<nn::Example> out;
  out.reserve(static_cast<std::size_t>(X.n_samples));
  for (int i = 0; i < X.n_samples; ++i) {
    const auto r = X.row(i);
    out.push_back({nn::Tensor({X.n_features}, std::vector<double>(r.begin(), r.end())), X.labels[static_cast<std::size_t>(i)]});
  }
  return out;
}

}  // namespace

int MlpModel::predict(std::span<const double> x) {
  return nn::predict(net, nn::Tensor({static_cast<int>(x.size())}, std::vector<double>(x.begin(), x.end()))).label;
}

std::vector<int> MlpModel::predict(const FeatureMatrix& X) {
  std::vector<int> out;
  for (int i = 0; i < X.n_samples; ++i) out.push_back(predict(X.row(i)));
  return out;
}

MlpModel train_mlp(const FeatureMatrix& X, int hidden_units, const nn::TrainConfig& cfg,
                   const FeatureMatrix* validation) {
  X.validate();
  if (hidden_units < 1) throw Error(ErrorCode::BadConfig, "hidden_units must be >= 1");
  MlpModel m;
  m.net = nn::build_mlp({X.n_features, hidden_units, std::max(2, X.n_classes())}, derive_seed(cfg.seed, 0xA11));
  const auto train_set = to_examples(X);
  const auto val_set = validation ? to_examples(*validation) : std::vector<nn::Example>{};
  m.result = nn::train(m.net, train_set, val_set, cfg);
  return m;
}

}  // namespace shcnn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shcnn/augment.hpp"
#include "shcnn/nn/train.hpp"

namespace shcnn {

// Row-major samples x features, values in [0,1].
struct FeatureMatrix {
  int n_samples = 0;
  int n_features = 0;
  std::vector<double> values;
  std::vector<int> labels;

  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * n_features, static_cast<std::size_t>(n_features)};
  }
  int n_classes() const;  // max label + 1
  void validate() const;
};

// Flattened pixels / 255. All patches must share one size.
FeatureMatrix make_features(std::span<const LabeledPatch> patches);

// ---- Random forest ----------------------------------------------------------

struct RfcConfig {
  int n_trees = 100;
  bool bootstrap = true;
  int max_features = 0;  // 0 = floor(sqrt(n_features))
  int min_leaf = 1;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left iff x[feature] <= threshold
  int left = -1;
  int right = -1;
  int label = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int predict(std::span<const double> x) const;
};

struct RandomForest {
  int n_classes = 0;
  std::vector<DecisionTree> trees;

  // Majority vote, ties to the lowest class index.
  int predict(std::span<const double> x) const;
  std::vector<int> predict(const FeatureMatrix& X) const;
};

RandomForest train_rfc(const FeatureMatrix& X, const RfcConfig& cfg);

// ---- Support vector classifier ------------------------------------------------

enum class KernelType { Linear, Rbf };

struct SvcConfig {
  KernelType kernel = KernelType::Linear;
  double C = 1.0;
  double gamma = 0.0;  // RBF only; 0 = 1 / (n_features * var(X))
  double tolerance = 1e-3;  // KKT violation stopping threshold
  long max_iterations = 10'000'000;
  bool throw_on_nonconvergence = false;
};

// One binary soft-margin problem: f(x) = sum_i coef_i k(sv_i, x) - rho.
struct BinarySvm {
  std::vector<double> alpha;  // per training point, in [0, C]
  std::vector<int> y;  // +1 / -1 per training point
  std::vector<int> support;  // training indices with alpha > 0
  std::vector<double> coef;  // alpha_i * y_i per support vector
  std::vector<double> linear_w;  // linear kernel only
  double rho = 0.0;
  long iterations = 0;
  bool converged = true;
};

struct SvcModel {
  SvcConfig config;
  double gamma = 0.0;
  int n_classes = 0;
  int n_features = 0;
  std::vector<double> train_values;  // training rows, row-major
  std::vector<BinarySvm> problems;  // one per class (one-vs-rest), or one when 2 classes
  bool converged = true;

  double kernel(std::span<const double> a, std::span<const double> b) const;
  // Per-class scores (length n_classes).
  std::vector<double> decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  std::vector<int> predict(const FeatureMatrix& X) const;
  std::span<const double> train_row(int i) const;
};

double default_gamma(const FeatureMatrix& X);

SvcModel train_svc(const FeatureMatrix& X, const SvcConfig& cfg);
SvcModel train_svc_linear(const FeatureMatrix& X, double C);
SvcModel train_svc_rbf(const FeatureMatrix& X, double C, double gamma);

// ---- MLP ------------------------------------------------------------------------

struct MlpModel {
  nn::Network net;
  nn::TrainResult result;

  int predict(std::span<const double> x);
  std::vector<int> predict(const FeatureMatrix& X);
};

MlpModel train_mlp(const FeatureMatrix& X, int hidden_units, const nn::TrainConfig& cfg,
                   const FeatureMatrix* validation = nullptr);

}  // namespace shcnn

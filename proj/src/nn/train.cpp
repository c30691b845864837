#include "shcnn/nn/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "shcnn/error.hpp"

namespace shcnn::nn {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorCode::BadConfig, "learning rate must be finite and non-negative");
  if (batch_size < 1) throw Error(ErrorCode::BadConfig, "batch size must be >= 1");
  if (epochs < 1) throw Error(ErrorCode::BadConfig, "epochs must be >= 1");
  if (patience < 1) throw Error(ErrorCode::BadConfig, "patience must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw Error(ErrorCode::BadConfig, "adam betas must lie in [0,1)");
}

namespace {

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<ParamRef>& params, double grad_scale) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    std::size_t k = 0;
    for (auto& p : params) {
      for (std::size_t i = 0; i < p.values.size(); ++i, ++k) {
        const double g = p.grads[i] * grad_scale;
        if (cfg_.optimizer == Optimizer::Sgd) {
          p.values[i] -= cfg_.learning_rate * g;
        } else {
          m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
          v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g * g;
          p.values[i] -= cfg_.learning_rate * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + cfg_.adam_epsilon);
        }
      }
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

}  // namespace

double evaluate_accuracy(Network& net, std::span<const Example> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& e : data) correct += predict(net, e.x).label == e.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(Network& net, std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  const int n_classes = net.n_classes();
  std::vector<std::size_t> per_class(static_cast<std::size_t>(n_classes), 0);
  for (const auto& e : train_set) {
    if (e.label < 0 || e.label >= n_classes) throw Error(ErrorCode::BadConfig, "training label out of range");
    ++per_class[static_cast<std::size_t>(e.label)];
  }
  for (int c = 0; c < n_classes; ++c) {
    if (per_class[static_cast<std::size_t>(c)] == 0)
      throw Error(ErrorCode::EmptyClass, "no training example for class " + std::to_string(c));
  }

  auto params = net.params();
  std::size_t n_params = 0;
  for (const auto& p : params) n_params += p.values.size();
  OptimizerState opt(cfg, n_params);

  TrainResult result;
  std::vector<double> best_params = net.flat_parameters();
  result.best_val_acc = -1.0;
  int since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      net.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const Example& e = train_set[order[i]];
        const Tensor logits = net.forward(e.x, Mode::Train, rng);
        const SoftmaxLoss sl = softmax_xent(logits, e.label);
        if (!std::isfinite(sl.loss))
          throw Error(ErrorCode::DivergenceDetected, "non-finite loss at epoch " + std::to_string(epoch));
        loss_sum += sl.loss;
        correct += argmax(logits.values()) == e.label ? 1 : 0;
        net.backward(sl.grad);
      }
      opt.step(params, 1.0 / static_cast<double>(end - start));
    }

    EpochStats s;
    s.epoch = epoch;
    s.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    s.loss = loss_sum / static_cast<double>(train_set.size());
    s.val_acc = val_set.empty() ? s.train_acc : evaluate_accuracy(net, val_set);
    result.history.push_back(s);

    if (s.val_acc > result.best_val_acc) {
      result.best_val_acc = s.val_acc;
      result.best_epoch = epoch;
      best_params = net.flat_parameters();
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  net.set_flat_parameters(best_params);
  return result;
}

std::string format_history_csv(std::span<const EpochStats> history) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_acc,val_acc,loss\n";
  for (const auto& s : history) os << s.epoch << ',' << s.train_acc << ',' << s.val_acc << ',' << s.loss << '\n';
  return os.str();
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochStats> history) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write history: " + path.string());
  os << format_history_csv(history);
}

}  // namespace shcnn::nn

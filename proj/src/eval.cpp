#include "shcnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "shcnn/error.hpp"
#include "shcnn/rng.hpp"

namespace shcnn {

Split split_dataset(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw Error(ErrorCode::TooFew, "need at least 4 samples to split, got " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());

  std::size_t n_train = n / 2, n_val = n / 4, n_test = n / 4;
  std::size_t rest = n - n_train - n_val - n_test;
  for (std::size_t* part : {&n_train, &n_val, &n_test}) {
    if (rest == 0) break;
    ++*part;
    --rest;
  }
  Split s;
  s.seed = seed;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                      perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  return s;
}

std::vector<std::size_t> balance_classes(std::span<const int> labels, std::uint64_t seed) {
  if (labels.empty()) throw Error(ErrorCode::EmptyClass, "cannot balance an empty label list");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::size_t target = 0;
  for (const auto& [c, idx] : members) target = std::max(target, idx.size());

  std::vector<std::size_t> out(labels.size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  Rng rng(seed);
  for (const auto& [c, idx] : members) {
    for (std::size_t k = idx.size(); k < target; ++k) out.push_back(idx[rng.below(idx.size())]);
  }
  return out;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
  if (pred.empty()) throw Error(ErrorCode::EmptyInput, "accuracy of zero samples");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

RunStats run_stats(std::span<const double> accs) {
  if (accs.size() < 2) throw Error(ErrorCode::TooFew, "run statistics need at least two runs");
  RunStats s;
  s.accuracies.assign(accs.begin(), accs.end());
  const double n = static_cast<double>(accs.size());
  for (const double a : accs) s.mean += a;
  s.mean /= n;
  double ss = 0.0;
  for (const double a : accs) ss += (a - s.mean) * (a - s.mean);
  s.std = std::sqrt(ss / (n - 1.0));
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> truth, int n_classes) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
  ConfusionMatrix m(static_cast<std::size_t>(n_classes), std::vector<long>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= n_classes || truth[i] < 0 || truth[i] >= n_classes)
      throw Error(ErrorCode::BadConfig, "label outside 0.." + std::to_string(n_classes - 1));
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
  }
  return m;
}

std::string format_results_csv(std::span<const ResultRow> rows,
                               std::span<const std::pair<std::string, std::string>> metadata) {
  std::ostringstream os;
  for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
  os << "method,aug_level,mean_acc,std_acc\n";
  os.setf(std::ios::fixed);
  os.precision(6);
  for (const auto& r : rows) os << r.method << ',' << r.aug_level << ',' << r.stats.mean << ',' << r.stats.std << '\n';
  return os.str();
}

void write_results_csv(const std::filesystem::path& path, std::span<const ResultRow> rows,
                       std::span<const std::pair<std::string, std::string>> metadata) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write results: " + path.string());
  os << format_results_csv(rows, metadata);
}

std::string render_results_svg(std::span<const ResultRow> rows) {
  constexpr int label_w = 120, bar_w = 400, row_h = 22, pad = 10;
  const int height = 2 * pad + row_h * static_cast<int>(rows.size()) + 20;
  const int width = label_w + bar_w + 2 * pad + 60;
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect class=\"bg\" x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
     << "\" fill=\"#ffffff\"/>\n";
  const int x0 = pad + label_w;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double y = pad + row_h * static_cast<double>(i);
    const double mean = std::clamp(r.stats.mean, 0.0, 1.0);
    const double lo = std::clamp(r.stats.mean - r.stats.std, 0.0, 1.0);
    const double hi = std::clamp(r.stats.mean + r.stats.std, 0.0, 1.0);
    std::string name = r.method;
    if (r.method == "SH-CNN") name += " " + std::to_string(r.aug_level) + "x";
    os << "<text x=\"" << pad << "\" y=\"" << y + row_h * 0.7
       << "\" font-family=\"monospace\" font-size=\"12\">" << name << "</text>\n";
    os << "<rect class=\"bar\" x=\"" << x0 << "\" y=\"" << y + 3 << "\" width=\"" << mean * bar_w
       << "\" height=\"" << row_h - 6 << "\" fill=\"#4c72b0\"/>\n";
    os << "<line class=\"std\" x1=\"" << x0 + lo * bar_w << "\" y1=\"" << y + row_h / 2.0 << "\" x2=\""
       << x0 + hi * bar_w << "\" y2=\"" << y + row_h / 2.0 << "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    os.precision(3);
    os << "<text x=\"" << x0 + bar_w + 6 << "\" y=\"" << y + row_h * 0.7
       << "\" font-family=\"monospace\" font-size=\"12\">" << r.stats.mean << "</text>\n";
    os.precision(2);
  }
  const double axis_y = pad + row_h * static_cast<double>(rows.size()) + 4;
  os << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << axis_y << "\" x2=\"" << x0 + bar_w << "\" y2=\""
     << axis_y << "\" stroke=\"#000000\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace shcnn

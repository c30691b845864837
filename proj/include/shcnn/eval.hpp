#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace shcnn {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Random permutation of 0..n-1 cut 50/25/25; the remainder of n/4 goes to
// train, then validation, then test. Throws TooFew for n < 4.
Split split_dataset(std::size_t n, std::uint64_t seed);

// Indices 0..n-1 in order, followed by minority-class indices drawn with
// replacement until every present class matches the majority count.
// Throws EmptyClass for empty input.
std::vector<std::size_t> balance_classes(std::span<const int> labels, std::uint64_t seed);

// Throws LengthMismatch, EmptyInput.
double accuracy(std::span<const int> pred, std::span<const int> truth);

struct RunStats {
  std::vector<double> accuracies;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

// Throws TooFew for fewer than two runs.
RunStats run_stats(std::span<const double> accs);

using ConfusionMatrix = std::vector<std::vector<long>>;

// M[truth][pred]. Throws LengthMismatch, BadConfig for labels out of range.
ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> truth, int n_classes);

struct ResultRow {
  std::string method;
  int aug_level = 0;
  RunStats stats;
};

// `method,aug_level,mean_acc,std_acc`, preceded by `# key=value` comment lines
// for each metadata entry.
std::string format_results_csv(std::span<const ResultRow> rows,
                               std::span<const std::pair<std::string, std::string>> metadata = {});

// Horizontal bar chart of mean accuracy with a +-std whisker per row.
std::string render_results_svg(std::span<const ResultRow> rows);
void write_results_csv(const std::filesystem::path& path, std::span<const ResultRow> rows,
                       std::span<const std::pair<std::string, std::string>> metadata = {});

}  // namespace shcnn

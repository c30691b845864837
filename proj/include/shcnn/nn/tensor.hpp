#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shcnn/image.hpp"

namespace shcnn::nn {

// Dense row-major tensor; rank 3 is (channels, height, width), rank 1 is a
// flat feature vector.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor from_image(const GrayImage& img);  // (1, H, W), pixels / 255

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }

  int channels() const { return shape_.at(0); }
  int height() const { return shape_.at(1); }
  int width() const { return shape_.at(2); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int c, int y, int x) { return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x]; }
  double at(int c, int y, int x) const { return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  // Contiguous plane of channel c.
  std::span<const double> plane(int c) const;
  std::span<double> plane(int c);

  Tensor reshaped(std::vector<int> shape) const;
  bool all_finite() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::size_t shape_size(const std::vector<int>& shape);

}  // namespace shcnn::nn

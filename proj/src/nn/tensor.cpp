#include "shcnn/nn/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "shcnn/error.hpp"

namespace shcnn::nn {

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (const int d : shape) {
    if (d < 1) throw Error(ErrorCode::ShapeMismatch, "tensor dimensions must be >= 1");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) throw Error(ErrorCode::ShapeMismatch, "data length does not match shape");
}

Tensor Tensor::from_image(const GrayImage& img) {
  Tensor t({1, img.height(), img.width()});
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) t.data_[i] = px[i] / 255.0;
  return t;
}

std::span<const double> Tensor::plane(int c) const {
  const std::size_t n = static_cast<std::size_t>(shape_[1]) * shape_[2];
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * n, n);
}

std::span<double> Tensor::plane(int c) {
  const std::size_t n = static_cast<std::size_t>(shape_[1]) * shape_[2];
  return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * n, n);
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (shape_size(shape) != data_.size()) throw Error(ErrorCode::ShapeMismatch, "reshape changes element count");
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  for (const double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace shcnn::nn

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace shcnn {

// Row-major 8-bit grayscale raster.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

  // Clamps coordinates into the image (edge replication).
  std::uint8_t clamped(int x, int y) const;

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  // Copies a w x h window whose top-left pixel is (x0, y0); pixels outside
  // the image are edge-replicated.
  GrayImage crop(int x0, int y0, int w, int h) const;

  GrayImage transposed() const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }

  // Out-of-bounds reads return 0.
  bool get_or_zero(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
  }

  std::size_t count() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Binary PGM (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace shcnn

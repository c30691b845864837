#include "shcnn/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "shcnn/error.hpp"

namespace shcnn {

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::ShapeMismatch, "image dimensions must be >= 1");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw Error(ErrorCode::ShapeMismatch, "image dimensions must be >= 1");
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::ShapeMismatch, "pixel count does not match width*height");
  }
}

std::uint8_t GrayImage::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
}

GrayImage GrayImage::crop(int x0, int y0, int w, int h) const {
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = clamped(x0 + x, y0 + y);
  }
  return out;
}

GrayImage GrayImage::transposed() const {
  GrayImage out(height_, width_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out.at(y, x) = at(x, y);
  }
  return out;
}

BinaryImage::BinaryImage(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::ShapeMismatch, "image dimensions must be >= 1");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0);
}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto px = img.pixels();
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  if (next_token(in) != "P5") throw Error(ErrorCode::IoFailure, path.string() + " is not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoFailure, "malformed PGM header in " + path.string());
  }
  if (w < 1 || h < 1 || maxval != 255) {
    throw Error(ErrorCode::IoFailure, "unsupported PGM geometry or maxval in " + path.string());
  }
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (in.gcount() != static_cast<std::streamsize>(px.size())) {
    throw Error(ErrorCode::IoFailure, "truncated pixel data in " + path.string());
  }
  return GrayImage(w, h, std::move(px));
}

}  // namespace shcnn

#pragma once

// Brute-force reference implementations. They deliberately share no code
// with the library paths they check.

#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "shcnn/image.hpp"
#include "shcnn/rng.hpp"

namespace oracle {

using shcnn::BinaryImage;
using shcnn::GrayImage;

inline GrayImage random_gray(shcnn::Rng& rng, int w, int h, int levels = 256) {
  GrayImage img(w, h);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(levels)));
  return img;
}

inline BinaryImage random_binary(shcnn::Rng& rng, int w, int h, double p) {
  BinaryImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.set(x, y, rng.bernoulli(p));
  }
  return img;
}

// Literal CDF formula: count pixels <= v for every pixel.
inline GrayImage equalize(const GrayImage& img) {
  const auto px = img.pixels();
  const double n = static_cast<double>(px.size());
  auto cdf = [&](int v) {
    double c = 0;
    for (auto p : px) c += (p <= v) ? 1 : 0;
    return c;
  };
  int vmin = 255;
  for (auto p : px) vmin = std::min<int>(vmin, p);
  const double cmin = cdf(vmin);
  if (n == cmin) return img;
  GrayImage out = img;
  for (auto& p : out.pixels()) p = static_cast<std::uint8_t>(std::lround((cdf(p) - cmin) / (n - cmin) * 255.0));
  return out;
}

// Between-class variance for every threshold; returns the maximizer (smallest on ties).
inline int otsu(const GrayImage& img) {
  double best = -1;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (auto p : img.pixels()) {
      if (p < t) {
        n0 += 1;
        s0 += p;
      } else {
        n1 += 1;
        s1 += p;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double m0 = s0 / n0, m1 = s1 / n1;
    const double var = n0 * n1 * (m0 - m1) * (m0 - m1);
    if (var > best) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

inline BinaryImage erode(const BinaryImage& img, int r) {
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      bool all = true;
      for (int dy = -r; dy <= r && all; ++dy) {
        for (int dx = -r; dx <= r && all; ++dx) all = img.get_or_zero(x + dx, y + dy);
      }
      out.set(x, y, all);
    }
  }
  return out;
}

using PointSet = std::set<std::pair<int, int>>;

// 8-connected foreground components, in raster order of their first pixel.
inline std::vector<PointSet> components(const BinaryImage& img) {
  std::vector<std::vector<int>> seen(img.height(), std::vector<int>(img.width(), 0));
  std::vector<PointSet> out;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y) || seen[y][x]) continue;
      PointSet comp;
      std::queue<std::pair<int, int>> q;
      q.push({x, y});
      seen[y][x] = 1;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop();
        comp.insert({cx, cy});
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (img.get_or_zero(nx, ny) && !seen[ny][nx]) {
              seen[ny][nx] = 1;
              q.push({nx, ny});
            }
          }
        }
      }
      out.push_back(std::move(comp));
    }
  }
  return out;
}

// Pixels of `comp` 4-adjacent to the region outside it: the zero pixels
// 4-connected to the padded frame when only `comp` is foreground.
inline PointSet outer_boundary(const PointSet& comp, int w, int h) {
  const int W = w + 2, H = h + 2;
  std::vector<std::vector<int>> fg(H, std::vector<int>(W, 0)), outside(H, std::vector<int>(W, 0));
  for (auto [x, y] : comp) fg[y + 1][x + 1] = 1;
  std::queue<std::pair<int, int>> q;
  q.push({0, 0});
  outside[0][0] = 1;
  const std::array<std::pair<int, int>, 4> n4{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop();
    for (auto [dx, dy] : n4) {
      const int nx = x + dx, ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= W || ny >= H || fg[ny][nx] || outside[ny][nx]) continue;
      outside[ny][nx] = 1;
      q.push({nx, ny});
    }
  }
  PointSet out;
  for (auto [x, y] : comp) {
    for (auto [dx, dy] : n4) {
      if (outside[y + 1 + dy][x + 1 + dx]) {
        out.insert({x, y});
        break;
      }
    }
  }
  return out;
}

}  // namespace oracle

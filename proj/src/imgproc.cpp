#include "shcnn/imgproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "shcnn/error.hpp"

namespace shcnn {

GrayImage equalize_histogram(const GrayImage& img) {
  std::array<std::size_t, 256> hist{};
  for (const auto v : img.pixels()) ++hist[v];

  std::array<std::size_t, 256> cdf{};
  std::size_t running = 0;
  std::size_t cdf_min = 0;
  for (int v = 0; v < 256; ++v) {
    running += hist[v];
    cdf[v] = running;
    if (cdf_min == 0 && running > 0) cdf_min = running;
  }
  const std::size_t n = img.size();
  if (n == cdf_min) return img;

  std::array<std::uint8_t, 256> lut{};
  const double denom = static_cast<double>(n - cdf_min);
  for (int v = 0; v < 256; ++v) {
    if (cdf[v] < cdf_min) continue;  // value absent below the minimum; never looked up
    const double scaled = static_cast<double>(cdf[v] - cdf_min) / denom * 255.0;
    lut[v] = static_cast<std::uint8_t>(std::lround(scaled));
  }
  GrayImage out = img;
  for (auto& v : out.pixels()) v = lut[v];
  return out;
}

std::uint8_t otsu_threshold(const GrayImage& img) {
  std::array<double, 256> hist{};
  for (const auto v : img.pixels()) hist[v] += 1.0;
  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int v = 0; v < 256; ++v) sum_all += v * hist[v];

  // Class 0 = {v < t}, class 1 = {v >= t}.
  double best = -1.0;
  int best_t = 0;
  double w0 = 0.0;
  double sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    if (t > 0) {
      w0 += hist[t - 1];
      sum0 += (t - 1) * hist[t - 1];
    }
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return static_cast<std::uint8_t>(best_t);
}

BinaryImage threshold_binary(const GrayImage& img, std::optional<std::uint8_t> t) {
  const std::uint8_t level = t.has_value() ? *t : otsu_threshold(img);
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out.set(x, y, img.at(x, y) >= level);
  }
  return out;
}

BinaryImage erode(const BinaryImage& img, int se_radius) {
  if (se_radius < 1) throw Error(ErrorCode::ShapeMismatch, "erosion radius must be >= 1");
  const int w = img.width();
  const int h = img.height();

  // Separable: a square SE is a horizontal run followed by a vertical run.
  auto run_ok = [](const std::vector<int>& ones_prefix, int lo, int hi, int limit) {
    if (lo < 0 || hi >= limit) return false;
    return ones_prefix[hi + 1] - ones_prefix[lo] == hi - lo + 1;
  };

  BinaryImage rows(w, h);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
  for (int y = 0; y < h; ++y) {
    prefix[0] = 0;
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + (img.at(x, y) ? 1 : 0);
    for (int x = 0; x < w; ++x) rows.set(x, y, run_ok(prefix, x - se_radius, x + se_radius, w));
  }
  BinaryImage out(w, h);
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + (rows.at(x, y) ? 1 : 0);
    for (int y = 0; y < h; ++y) out.set(x, y, run_ok(prefix, y - se_radius, y + se_radius, h));
  }
  return out;
}

namespace {

// 8-neighbourhood in clockwise order as displayed (y down), starting east.
constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

// Label raster with a one-pixel zero frame, as Suzuki-Abe assumes.
class LabelGrid {
 public:
  explicit LabelGrid(const BinaryImage& img) : w_(img.width() + 2), h_(img.height() + 2) {
    cells_.assign(static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_), 0);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) at(x + 1, y + 1) = img.at(x, y) ? 1 : 0;
    }
  }
  int width() const { return w_; }
  int height() const { return h_; }
  int& at(int x, int y) { return cells_[static_cast<std::size_t>(y) * w_ + x]; }

 private:
  int w_;
  int h_;
  std::vector<int> cells_;
};

// Traces one border starting at `start` with the known background neighbour
// `from`. Marks visited pixels with +/-nbd. Returns the points in tracing
// order (frame coordinates).
std::vector<PixelPoint> trace_border(LabelGrid& f, PixelPoint start, PixelPoint from, int nbd) {
  std::vector<PixelPoint> pts;
  // (3.1) Search clockwise from `from` for a non-zero pixel.
  const int d0 = direction_of(from.x - start.x, from.y - start.y);
  int found = -1;
  for (int k = 0; k < 8; ++k) {
    const int d = (d0 + k) % 8;
    if (f.at(start.x + kDx[d], start.y + kDy[d]) != 0) {
      found = d;
      break;
    }
  }
  if (found < 0) {
    f.at(start.x, start.y) = -nbd;
    pts.push_back(start);
    return pts;
  }
  const PixelPoint p1{start.x + kDx[found], start.y + kDy[found]};
  PixelPoint p2 = p1;
  PixelPoint p3 = start;
  while (true) {
    pts.push_back(p3);
    // (3.3) Counter-clockwise from the element after p2.
    const int d2 = direction_of(p2.x - p3.x, p2.y - p3.y);
    bool east_examined_zero = false;
    PixelPoint p4{};
    for (int k = 1; k <= 8; ++k) {
      const int d = ((d2 - k) % 8 + 8) % 8;
      const int nx = p3.x + kDx[d];
      const int ny = p3.y + kDy[d];
      if (f.at(nx, ny) != 0) {
        p4 = {nx, ny};
        break;
      }
      if (d == 0) east_examined_zero = true;
    }
    // (3.4)
    int& cell = f.at(p3.x, p3.y);
    if (east_examined_zero) {
      cell = -nbd;
    } else if (cell == 1) {
      cell = nbd;
    }
    // (3.5)
    if (p4 == start && p3 == p1) break;
    p2 = p3;
    p3 = p4;
  }
  return pts;
}

}  // namespace

std::vector<Contour> follow_borders(const BinaryImage& img) {
  LabelGrid f(img);
  std::vector<Contour> out;
  int nbd = 1;
  for (int y = 1; y < f.height() - 1; ++y) {
    for (int x = 1; x < f.width() - 1; ++x) {
      const int v = f.at(x, y);
      if (v == 0) continue;
      if (v == 1 && f.at(x - 1, y) == 0) {
        ++nbd;
        auto pts = trace_border(f, {x, y}, {x - 1, y}, nbd);
        Contour c;
        c.closed = true;
        c.points.reserve(pts.size());
        // Suzuki-Abe walks outer borders counter-clockwise on screen; keep
        // the start pixel and reverse the remainder.
        c.points.push_back({pts[0].x - 1, pts[0].y - 1});
        for (auto it = pts.rbegin(); it != pts.rend() - 1; ++it) c.points.push_back({it->x - 1, it->y - 1});
        out.push_back(std::move(c));
      } else if (v >= 1 && f.at(x + 1, y) == 0) {
        // Hole borders are traced only to mark their pixels.
        ++nbd;
        trace_border(f, {x, y}, {x + 1, y}, nbd);
      }
    }
  }
  return out;
}

double contour_area(const Contour& c) {
  const auto& p = c.points;
  if (p.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    twice += static_cast<double>(a.x) * b.y - static_cast<double>(b.x) * a.y;
  }
  return std::abs(twice) / 2.0;
}

const Contour& largest_contour(std::span<const Contour> contours) {
  if (contours.empty()) throw Error(ErrorCode::EmptyInput, "no contours to choose from");
  auto raster_key = [](const Contour& c) {
    if (c.points.empty()) return std::pair{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    return std::pair{c.points.front().y, c.points.front().x};
  };
  const Contour* best = &contours.front();
  double best_area = contour_area(*best);
  for (const auto& c : contours.subspan(1)) {
    const double a = contour_area(c);
    if (a > best_area || (a == best_area && raster_key(c) < raster_key(*best))) {
      best = &c;
      best_area = a;
    }
  }
  return *best;
}

SideCenters side_centers(const Contour& c) {
  if (c.points.empty()) throw Error(ErrorCode::DegenerateContour, "empty contour");
  int min_x = std::numeric_limits<int>::max(), max_x = std::numeric_limits<int>::min();
  int min_y = min_x, max_y = max_x;
  for (const auto& p : c.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  if (min_x == max_x || min_y == max_y) {
    throw Error(ErrorCode::DegenerateContour, "contour bounding box has zero area");
  }

  // Midpoint of the span of points sharing an extreme coordinate.
  auto span_mid = [&](bool on_row, int coord) {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& p : c.points) {
      if ((on_row ? p.y : p.x) != coord) continue;
      const int v = on_row ? p.x : p.y;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return (lo + hi) / 2.0;
  };

  SideCenters s;
  s.top = {span_mid(true, min_y), static_cast<double>(min_y)};
  s.bottom = {span_mid(true, max_y), static_cast<double>(max_y)};
  s.left = {static_cast<double>(min_x), span_mid(false, min_x)};
  s.right = {static_cast<double>(max_x), span_mid(false, max_x)};
  return s;
}

}  // namespace shcnn

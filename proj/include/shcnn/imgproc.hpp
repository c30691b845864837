#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shcnn/image.hpp"

namespace shcnn {

struct PixelPoint {
  int x = 0;
  int y = 0;
  auto operator<=>(const PixelPoint&) const = default;
};

struct Point2d {
  double x = 0.0;
  double y = 0.0;
};

struct Contour {
  std::vector<PixelPoint> points;
  bool closed = true;
};

struct SideCenters {
  Point2d top;
  Point2d right;
  Point2d bottom;
  Point2d left;
};

// Histogram equalization: v' = round((cdf(v) - cdf_min) / (N - cdf_min) * 255).
// A constant image is returned unchanged.
GrayImage equalize_histogram(const GrayImage& img);

// Otsu's threshold: the t maximizing between-class variance of {< t} vs {>= t}.
// Ties go to the smallest t.
std::uint8_t otsu_threshold(const GrayImage& img);

// bit = 1 iff pixel >= t; Otsu's criterion when t is absent.
BinaryImage threshold_binary(const GrayImage& img, std::optional<std::uint8_t> t = std::nullopt);

// Erosion with a (2r+1)^2 square structuring element; out of bounds reads as 0.
BinaryImage erode(const BinaryImage& img, int se_radius);

// Outer border of every 8-connected foreground component (Suzuki-Abe border
// following with 4-connected background). Each contour starts at the
// component's first raster-order pixel and runs clockwise as displayed
// (y axis pointing down). Thin parts are traversed in both directions, so a
// pixel can occur twice in one contour.
std::vector<Contour> follow_borders(const BinaryImage& img);

// Absolute shoelace area of the traced polygon.
double contour_area(const Contour& c);

// Contour with the largest enclosed area; ties go to the earliest raster-order
// start point. Throws EmptyInput on an empty list.
const Contour& largest_contour(std::span<const Contour> contours);

// Midpoints of the contour points on each bounding-box side.
// Throws DegenerateContour when the bounding box has zero width or height.
SideCenters side_centers(const Contour& c);

}  // namespace shcnn

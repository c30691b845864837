#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shcnn/grid.hpp"
#include "shcnn/image.hpp"
#include "shcnn/imgproc.hpp"
#include "shcnn/synthwafer.hpp"

namespace shcnn {

enum class TemplateLevel { Chip, Street };
enum class Side { Top = 0, Right = 1, Bottom = 2, Left = 3 };
enum class Orientation { Horizontal, Vertical };

// Layout template chosen by the inspector: what to look for and how large the
// returned region of interest is.
struct Template {
  int chip_pitch_px = 32;
  int street_width_px = 8;
  int patch_size = 32;
  TemplateLevel level = TemplateLevel::Street;
  int erosion_radius = 1;
  // Fixed level on the equalized patch; when absent the Otsu split of the raw
  // patch is mapped through the equalization.
  std::optional<std::uint8_t> threshold;

  static Template for_layout(const WaferLayout& layout, TemplateLevel level, int patch_size);
  void validate() const;
};

struct ChipPatch {
  GridAddress grid_index;
  PixelPoint origin;  // top-left pixel in the wafer image
  GrayImage patch;
};

struct StreetROI {
  Point2d center;  // in the coordinates of the image the ROI was cut from
  Orientation orientation = Orientation::Vertical;
  Side side = Side::Top;
  GrayImage patch;
  GridAddress grid_index;
};

// One pitch x pitch patch per grid cell, in raster order. Throws LayoutMismatch
// if the grid does not fit in the image.
std::vector<ChipPatch> segment_chips(const GrayImage& wafer, const WaferLayout& layout);

// Inside iff every corner pixel of the chip cell lies strictly within the
// wafer radius of the origin.
ChipPosition chip_position_truth(GridAddress chip, const WaferLayout& layout);

// The street next to `chip` on `side`.
GridAddress street_on_side(GridAddress chip, Side side);

// Street localization chain: equalize -> threshold -> erode -> follow borders
// -> largest contour -> side centers, each center pushed outward by half a
// street width. ROIs are cut from `source` (edge-replicated when clipped) with
// `chip.origin` mapping chip-patch coordinates into it.
// Throws NoContour, DegenerateContour.
std::vector<StreetROI> locate_streets(const GrayImage& source, const ChipPatch& chip, const Template& tmpl);

// Same chain with the chip patch as its own source.
std::vector<StreetROI> locate_streets(const GrayImage& chip_patch, const Template& tmpl);

// Crop of `size` x `size` centered on a continuous point.
GrayImage crop_centered(const GrayImage& src, Point2d center, int size);

}  // namespace shcnn

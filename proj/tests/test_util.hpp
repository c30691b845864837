#pragma once

#include <cmath>

#include "shcnn/localization.hpp"
#include "shcnn/synthwafer.hpp"

namespace testutil {

// 7x7 chips of pitch 32 on a disc that clips the outer ring.
inline shcnn::WaferLayout small_layout() {
  shcnn::WaferLayout l;
  l.chips_x = 7;
  l.chips_y = 7;
  l.chip_pitch_px = 32;
  l.street_width_px = 8;
  l.wafer_radius_px = 100;
  l.image_width = 256;
  l.image_height = 256;
  l.origin = {128, 128};
  return l;
}

// Perpendicular distance from an ROI center to its street's true centerline.
inline double centerline_error(const shcnn::WaferLayout& layout, const shcnn::StreetROI& roi) {
  const double truth = layout.street_centerline(roi.grid_index);
  return roi.orientation == shcnn::Orientation::Vertical ? std::abs(roi.center.x - truth)
                                                         : std::abs(roi.center.y - truth);
}

}  // namespace testutil

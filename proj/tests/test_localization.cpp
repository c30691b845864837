#include <cmath>

#include "doctest.h"
#include "shcnn/augment.hpp"
#include "shcnn/error.hpp"
#include "shcnn/localization.hpp"
#include "test_util.hpp"

using namespace shcnn;

using testutil::centerline_error;

TEST_CASE("segment_chips: counts, centers, exact tiling") {
  auto layout = testutil::small_layout();
  layout.chips_x = 3;
  layout.chips_y = 3;
  const auto w = generate_wafer(layout, {}, 1);
  const auto chips = segment_chips(w.image, layout);
  REQUIRE(chips.size() == 9);
  CHECK(chips.front().grid_index == GridAddress::chip(-1, -1));
  CHECK(chips.back().grid_index == GridAddress::chip(1, 1));
  const int P = layout.chip_pitch_px;
  for (const auto& c : chips) {
    CHECK(c.patch.width() == P);
    CHECK(c.patch.height() == P);
    if (c.grid_index == GridAddress::chip(0, 0)) {
      CHECK(c.patch.at(P / 2, P / 2) == w.image.at(layout.origin.x, layout.origin.y));
    }
  }
  // Reassemble the grid region.
  GrayImage rebuilt(3 * P, 3 * P);
  for (const auto& c : chips) {
    const int bx = (c.grid_index.chip_i() + 1) * P, by = (c.grid_index.chip_j() + 1) * P;
    for (int y = 0; y < P; ++y)
      for (int x = 0; x < P; ++x) rebuilt.at(bx + x, by + y) = c.patch.at(x, y);
  }
  const auto o = layout.cell_origin(-1, -1);
  CHECK(rebuilt == w.image.crop(o.x, o.y, 3 * P, 3 * P));

  auto huge = layout;
  huge.chips_x = 11;
  CHECK_THROWS_AS(segment_chips(w.image, huge), Error);
}

TEST_CASE("chip_position_truth: inside, border, beyond") {
  WaferLayout l = testutil::small_layout();
  l.wafer_radius_px = 10000;
  CHECK(chip_position_truth(GridAddress::chip(0, 0), l) == ChipPosition::Inside);

  // Pitch 6: chip (-2,1) spans x in [-15,-10], y in [3,8]; its farthest
  // corner (-15,8) lies exactly 17 px from the origin.
  WaferLayout e;
  e.chips_x = 7;
  e.chips_y = 7;
  e.chip_pitch_px = 6;
  e.street_width_px = 2;
  e.origin = {50, 50};
  e.image_width = e.image_height = 100;
  e.wafer_radius_px = 17;
  CHECK(chip_position_truth(GridAddress::chip(-2, 1), e) == ChipPosition::Outside);
  e.wafer_radius_px = 18;
  CHECK(chip_position_truth(GridAddress::chip(-2, 1), e) == ChipPosition::Inside);
  CHECK(chip_position_truth(GridAddress::chip(5, 5), testutil::small_layout()) == ChipPosition::Outside);
}

TEST_CASE("locate_streets: clean chips land on the street centerline") {
  const auto layout = testutil::small_layout();
  const auto tmpl = Template::for_layout(layout, TemplateLevel::Street, 32);
  double total = 0;
  int n = 0;
  for (std::uint64_t seed = 0; n < 100; ++seed) {
    const auto w = generate_wafer(layout, {}, seed);
    for (const auto& chip : segment_chips(w.image, layout)) {
      if (w.truth.chip_positions.at(chip.grid_index) != ChipPosition::Inside || n >= 100) continue;
      const auto rois = locate_streets(w.image, chip, tmpl);
      REQUIRE(rois.size() == 4);
      for (const auto& roi : rois) {
        const double err = centerline_error(layout, roi);
        CHECK(err <= 2.0);
        total += err;
        CHECK(roi.patch.width() == 32);
        CHECK(w.truth.street_labels.count(roi.grid_index) == 1);
        CHECK(roi.grid_index.is_street());
      }
      ++n;
    }
  }
  CHECK(total / (4.0 * n) <= 2.0);
}

TEST_CASE("locate_streets: constant patch has no contour") {
  const auto layout = testutil::small_layout();
  const auto tmpl = Template::for_layout(layout, TemplateLevel::Street, 32);
  CHECK_THROWS_AS(locate_streets(GrayImage(32, 32, 128), tmpl), Error);
  try {
    locate_streets(GrayImage(32, 32, 128), tmpl);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoContour);
  }
  auto chip_tmpl = tmpl;
  chip_tmpl.level = TemplateLevel::Chip;
  CHECK_THROWS_AS(locate_streets(GrayImage(32, 32, 128), chip_tmpl), Error);
}

TEST_CASE("locate_streets: tolerates a 1 degree rotation") {
  const auto layout = testutil::small_layout();
  const auto tmpl = Template::for_layout(layout, TemplateLevel::Street, 32);
  const auto w = generate_wafer(layout, {}, 3);
  const double angle = 1.0 * M_PI / 180.0;
  // Rotate a 3x3-chip window about the center chip's center.
  const auto o = layout.cell_origin(-1, -1);
  const int P = layout.chip_pitch_px;
  const auto window = w.image.crop(o.x, o.y, 3 * P, 3 * P);
  TransformParams tp;
  tp.angle_deg = 1.0;
  const auto rotated = apply_transform(window, tp);
  const ChipPatch chip{GridAddress::chip(0, 0), {P, P}, rotated.crop(P, P, P, P)};
  const auto rois = locate_streets(rotated, chip, tmpl);
  const double c = (3 * P - 1) / 2.0;
  for (const auto& roi : rois) {
    // True centerline in window coordinates, rotated by +1 degree about c.
    const double truth = (roi.side == Side::Top || roi.side == Side::Left) ? P - 0.5 : 2 * P - 0.5;
    // Distance to the rotated line {p : n . (p - c) = truth - c} with n rotated.
    const bool vertical = roi.orientation == Orientation::Vertical;
    const double nx = vertical ? std::cos(angle) : -std::sin(angle);
    const double ny = vertical ? std::sin(angle) : std::cos(angle);
    const double dist = std::abs(nx * (roi.center.x - c) + ny * (roi.center.y - c) - (truth - c));
    CHECK(dist <= 3.0);
  }
}

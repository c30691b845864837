#include "shcnn/localization.hpp"

#include <algorithm>
#include <cmath>

#include "shcnn/error.hpp"

namespace shcnn {

Template Template::for_layout(const WaferLayout& layout, TemplateLevel level, int patch_size) {
  Template t;
  t.chip_pitch_px = layout.chip_pitch_px;
  t.street_width_px = layout.street_width_px;
  t.patch_size = patch_size;
  t.level = level;
  return t;
}

void Template::validate() const {
  if (patch_size < 8) throw Error(ErrorCode::BadConfig, "template patch_size must be >= 8");
  if (street_width_px < 1 || street_width_px >= chip_pitch_px) {
    throw Error(ErrorCode::BadConfig, "template street width must be in [1, pitch)");
  }
  if (erosion_radius < 1) throw Error(ErrorCode::BadConfig, "template erosion_radius must be >= 1");
}

std::vector<ChipPatch> segment_chips(const GrayImage& wafer, const WaferLayout& layout) {
  const int P = layout.chip_pitch_px;
  std::vector<ChipPatch> out;
  for (const auto& chip : layout.chips()) {
    const auto o = layout.cell_origin(chip.chip_i(), chip.chip_j());
    if (o.x < 0 || o.y < 0 || o.x + P > wafer.width() || o.y + P > wafer.height()) {
      throw Error(ErrorCode::LayoutMismatch, "chip grid extends beyond the " + std::to_string(wafer.width()) + "x" +
                                                 std::to_string(wafer.height()) + " image");
    }
    out.push_back({chip, o, wafer.crop(o.x, o.y, P, P)});
  }
  return out;
}

ChipPosition chip_position_truth(GridAddress chip, const WaferLayout& layout) {
  const auto o = layout.cell_origin(chip.chip_i(), chip.chip_j());
  const int last = layout.chip_pitch_px - 1;
  const long r2 = static_cast<long>(layout.wafer_radius_px) * layout.wafer_radius_px;
  for (const auto& [cx, cy] : {std::pair{0, 0}, std::pair{last, 0}, std::pair{0, last}, std::pair{last, last}}) {
    const long dx = o.x + cx - layout.origin.x;
    const long dy = o.y + cy - layout.origin.y;
    if (dx * dx + dy * dy >= r2) return ChipPosition::Outside;
  }
  return ChipPosition::Inside;
}

GridAddress street_on_side(GridAddress chip, Side side) {
  switch (side) {
    case Side::Top: return {chip.twice_x, chip.twice_y - 1};
    case Side::Right: return {chip.twice_x + 1, chip.twice_y};
    case Side::Bottom: return {chip.twice_x, chip.twice_y + 1};
    case Side::Left: return {chip.twice_x - 1, chip.twice_y};
  }
  return chip;
}

GrayImage crop_centered(const GrayImage& src, Point2d center, int size) {
  const double half = (size - 1) / 2.0;
  const int x0 = static_cast<int>(std::floor(center.x - half + 0.5));
  const int y0 = static_cast<int>(std::floor(center.y - half + 0.5));
  return src.crop(x0, y0, size, size);
}

namespace {

// Equalization spreads noisy chip bodies over a near-uniform histogram, where
// Otsu collapses to a median split. The split is chosen on the source
// histogram instead and carried through the (monotone) equalization map.
std::uint8_t equalized_otsu_level(const GrayImage& src, const GrayImage& equalized) {
  const std::uint8_t t = otsu_threshold(src);
  std::uint8_t level = 255;
  const auto s = src.pixels();
  const auto e = equalized.pixels();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= t) level = std::min(level, e[i]);
  }
  return level;
}

}  // namespace

std::vector<StreetROI> locate_streets(const GrayImage& source, const ChipPatch& chip, const Template& tmpl) {
  tmpl.validate();
  if (tmpl.level != TemplateLevel::Street) throw Error(ErrorCode::BadConfig, "locate_streets needs a street template");

  // Fixed order: equalize, threshold, erode, trace, pick, measure.
  const GrayImage equalized = equalize_histogram(chip.patch);
  const BinaryImage binary = threshold_binary(equalized, tmpl.threshold ? *tmpl.threshold : equalized_otsu_level(chip.patch, equalized));
  const std::size_t ones = binary.count();
  if (ones == 0 || ones == static_cast<std::size_t>(binary.width()) * binary.height()) {
    throw Error(ErrorCode::NoContour, "threshold does not separate chip from street");
  }
  const BinaryImage cleaned = erode(binary, tmpl.erosion_radius);
  const auto contours = follow_borders(cleaned);
  if (contours.empty()) throw Error(ErrorCode::NoContour, "no contour survives erosion");
  const Contour& body = largest_contour(contours);
  const SideCenters sc = side_centers(body);

  // Erosion pulls the border in by the SE radius; the street centerline lies
  // half a street (plus half a pixel to the pixel edge) beyond the true border.
  const double push = tmpl.erosion_radius + tmpl.street_width_px / 2.0 + 0.5;
  const double ox = chip.origin.x;
  const double oy = chip.origin.y;
  struct Entry {
    Side side;
    Point2d center;
    Orientation orientation;
  };
  const std::array<Entry, 4> entries{
      Entry{Side::Top, {sc.top.x + ox, sc.top.y - push + oy}, Orientation::Horizontal},
      Entry{Side::Right, {sc.right.x + push + ox, sc.right.y + oy}, Orientation::Vertical},
      Entry{Side::Bottom, {sc.bottom.x + ox, sc.bottom.y + push + oy}, Orientation::Horizontal},
      Entry{Side::Left, {sc.left.x - push + ox, sc.left.y + oy}, Orientation::Vertical},
  };
  std::vector<StreetROI> out;
  out.reserve(4);
  for (const auto& e : entries) {
    StreetROI roi;
    roi.center = e.center;
    roi.orientation = e.orientation;
    roi.side = e.side;
    roi.patch = crop_centered(source, e.center, tmpl.patch_size);
    roi.grid_index = street_on_side(chip.grid_index, e.side);
    out.push_back(std::move(roi));
  }
  return out;
}

std::vector<StreetROI> locate_streets(const GrayImage& chip_patch, const Template& tmpl) {
  return locate_streets(chip_patch, ChipPatch{GridAddress{}, PixelPoint{0, 0}, chip_patch}, tmpl);
}

}  // namespace shcnn

#include "shcnn/wafermap.hpp"

#include <algorithm>
#include <climits>
#include <sstream>

#include "shcnn/error.hpp"

namespace shcnn {

std::string render_svg(const WaferMap& map) {
  const auto& v = map.verdict;
  if (v.street_labels.empty() && v.chip_labels.empty()) throw Error(ErrorCode::EmptyVerdict, "nothing to draw");

  int min_x = INT_MAX, min_y = INT_MAX, max_x = INT_MIN, max_y = INT_MIN;
  auto extend = [&](GridAddress a) {
    min_x = std::min(min_x, a.twice_x);
    max_x = std::max(max_x, a.twice_x);
    min_y = std::min(min_y, a.twice_y);
    max_y = std::max(max_y, a.twice_y);
  };
  for (const auto& [a, l] : v.street_labels) extend(a);
  for (const auto& [a, l] : v.chip_labels) extend(a);

  // Half-cell units keep every coordinate integral.
  const int half = map.cell_px / 2;
  auto px = [&](int twice, int lo) { return (twice - lo + 2) * half; };
  const int width = (max_x - min_x + 4) * half;
  const int height = (max_y - min_y + 4) * half;
  const int chip_side = map.cell_px * 3 / 5;
  const int tick = map.cell_px * 3 / 5;
  const int stroke = std::max(1, map.cell_px / 8);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\" class=\"bg\"/>\n";
  for (const auto& [a, l] : v.chip_labels) {
    const int cx = px(a.twice_x, min_x), cy = px(a.twice_y, min_y);
    os << "<rect class=\"chip\" x=\"" << cx - chip_side / 2 << "\" y=\"" << cy - chip_side / 2 << "\" width=\""
       << chip_side << "\" height=\"" << chip_side << "\" fill=\"" << map.palette[static_cast<std::size_t>(to_index(l))]
       << "\"/>\n";
  }
  for (const auto& [a, l] : v.street_labels) {
    const int cx = px(a.twice_x, min_x), cy = px(a.twice_y, min_y);
    int x1 = cx, x2 = cx, y1 = cy, y2 = cy;
    if (a.x_is_half()) {
      x1 -= tick / 2;
      x2 += tick / 2;
    } else {
      y1 -= tick / 2;
      y2 += tick / 2;
    }
    os << "<line class=\"street\" x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
       << "\" stroke=\"" << map.palette[static_cast<std::size_t>(to_index(l))] << "\" stroke-width=\"" << stroke
       << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string export_csv(const WaferMap& map) { return format_verdict_csv(map.verdict); }

WaferVerdict import_csv(const std::string& text) { return parse_verdict_csv(text); }

}  // namespace shcnn

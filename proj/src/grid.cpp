#include "shcnn/grid.hpp"

#include <charconv>
#include <cstdlib>

#include "shcnn/error.hpp"

namespace shcnn {

Label label_from_index(int i) {
  if (i < 0 || i >= kNumLabels) throw Error(ErrorCode::BadConfig, "label index out of range: " + std::to_string(i));
  return static_cast<Label>(i);
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Flawless: return "flawless";
    case Label::Anomaly: return "anomaly";
    case Label::Faulty: return "faulty";
  }
  return "?";
}

std::string_view to_string(ChipPosition p) { return p == ChipPosition::Inside ? "inside" : "outside"; }

std::string format_half(int twice) {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  const int whole = std::abs(twice) / 2;
  return std::string(twice < 0 ? "-" : "") + std::to_string(whole) + ".5";
}

int parse_half(const std::string& text) {
  auto fail = [&] { return Error(ErrorCode::BadConfig, "bad grid coordinate '" + text + "'"); };
  if (text.empty()) throw fail();
  const bool neg = text[0] == '-';
  std::string body = neg ? text.substr(1) : text;
  bool half = false;
  if (const auto dot = body.find('.'); dot != std::string::npos) {
    const std::string frac = body.substr(dot + 1);
    if (frac == "5") {
      half = true;
    } else if (frac != "0") {
      throw fail();
    }
    body = body.substr(0, dot);
  }
  int whole = 0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), whole);
  if (ec != std::errc{} || ptr != body.data() + body.size() || body.empty()) throw fail();
  const int twice = 2 * whole + (half ? 1 : 0);
  return neg ? -twice : twice;
}

}  // namespace shcnn

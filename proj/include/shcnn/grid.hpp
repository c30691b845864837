#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>

namespace shcnn {

// Severity classes, ordered so that a larger value is a worse verdict.
enum class Label : std::uint8_t { Flawless = 0, Anomaly = 1, Faulty = 2 };

inline constexpr int kNumLabels = 3;

enum class ChipPosition : std::uint8_t { Inside, Outside };

inline Label worse(Label a, Label b) { return a < b ? b : a; }
inline int to_index(Label l) { return static_cast<int>(l); }
Label label_from_index(int i);
std::string_view to_string(Label l);
std::string_view to_string(ChipPosition p);

// Grid address in doubled coordinates, so half-integers stay exact.
// Chips sit at integer coordinates (both components even when doubled);
// streets have exactly one half-integer component: (i + 1/2, j) is the
// street between chips (i, j) and (i + 1, j).
struct GridAddress {
  int twice_x = 0;
  int twice_y = 0;

  static GridAddress chip(int i, int j) { return {2 * i, 2 * j}; }
  // The street between (i, j) and (i + 1, j).
  static GridAddress street_x(int i, int j) { return {2 * i + 1, 2 * j}; }
  // The street between (i, j) and (i, j + 1).
  static GridAddress street_y(int i, int j) { return {2 * i, 2 * j + 1}; }

  bool is_chip() const { return twice_x % 2 == 0 && twice_y % 2 == 0; }
  bool is_street() const { return (twice_x % 2 != 0) != (twice_y % 2 != 0); }
  // Street with half-integer x: separates horizontally adjacent chips.
  bool x_is_half() const { return twice_x % 2 != 0; }

  double x() const { return twice_x / 2.0; }
  double y() const { return twice_y / 2.0; }

  // Integer chip coordinates; only meaningful when is_chip().
  int chip_i() const { return twice_x / 2; }
  int chip_j() const { return twice_y / 2; }

  auto operator<=>(const GridAddress&) const = default;
};

// "3", "-1", "0.5", "-1.5".
std::string format_half(int twice);
// Inverse of format_half; throws Error(BadConfig) on malformed input.
int parse_half(const std::string& text);

using StreetLabels = std::map<GridAddress, Label>;
using ChipLabels = std::map<GridAddress, Label>;
using ChipPositions = std::map<GridAddress, ChipPosition>;

}  // namespace shcnn

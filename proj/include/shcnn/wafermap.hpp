#pragma once

#include <array>
#include <string>

#include "shcnn/pipeline.hpp"

namespace shcnn {

struct WaferMap {
  WaferVerdict verdict;
  std::array<std::string, kNumLabels> palette{"#2e9e3e", "#f2c80f", "#d62728"};  // green, yellow, red
  int cell_px = 24;
};

// Chips as filled squares at integer grid points, streets as short strokes at
// half-integer points: streets with half-integer x are horizontal ticks,
// streets with half-integer y vertical ticks. Outside chips are not drawn.
// Throws EmptyVerdict.
std::string render_svg(const WaferMap& map);

// `kind,x,y,label`, label 0 flawless, 1 anomaly, 2 faulty.
std::string export_csv(const WaferMap& map);
WaferVerdict import_csv(const std::string& text);

}  // namespace shcnn

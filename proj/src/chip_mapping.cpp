#include "shcnn/chip_mapping.hpp"

#include <optional>

#include "shcnn/error.hpp"

namespace shcnn {

std::array<GridAddress, 4> adjacent_streets(GridAddress chip) {
  return {GridAddress{chip.twice_x, chip.twice_y - 1}, GridAddress{chip.twice_x + 1, chip.twice_y},
          GridAddress{chip.twice_x, chip.twice_y + 1}, GridAddress{chip.twice_x - 1, chip.twice_y}};
}

ChipLabels map_streets_to_chips(const StreetLabels& streets, std::span<const GridAddress> chips) {
  ChipLabels out;
  for (const auto& chip : chips) {
    std::optional<Label> verdict;
    for (const auto& s : adjacent_streets(chip)) {
      if (const auto it = streets.find(s); it != streets.end()) {
        verdict = verdict ? worse(*verdict, it->second) : it->second;
      }
    }
    if (!verdict) {
      throw Error(ErrorCode::MissingAdjacency,
                  "chip (" + format_half(chip.twice_x) + "," + format_half(chip.twice_y) + ") has no labelled street");
    }
    out.emplace(chip, *verdict);
  }
  return out;
}

}  // namespace shcnn

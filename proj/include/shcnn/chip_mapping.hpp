#pragma once

#include <array>
#include <span>

#include "shcnn/grid.hpp"

namespace shcnn {

// The four street addresses adjacent to chip (i, j): (i +- 1/2, j), (i, j +- 1/2).
std::array<GridAddress, 4> adjacent_streets(GridAddress chip);

// Street-based chip classification: each chip takes the most severe label
// among its labelled adjacent streets (Faulty > Anomaly > Flawless).
// Throws MissingAdjacency if a chip has no labelled adjacent street.
ChipLabels map_streets_to_chips(const StreetLabels& streets, std::span<const GridAddress> chips);

}  // namespace shcnn

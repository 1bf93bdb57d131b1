// SPDX-License-Identifier: Apache-2.0
// Exhaustive per-pixel dependency replay of a tiled stack.
#pragma once

#include <cstdint>
#include <vector>

#include "fusecost/tiling.hpp"

namespace fusecost::oracle {

struct PixelMap {
  Region required;  // bounding box of the pixels consumers read this tile
  Region fresh;     // bounding box of required pixels not already available
  bool fresh_is_box = true;
  std::uint64_t from_left = 0, from_above = 0;  // reused pixels x channels
};

// Result indexed [row * cols + col][map], maps ordered like geom.maps().
std::vector<std::vector<PixelMap>> replay(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid);

}  // namespace fusecost::oracle

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fusecost/accelerator.hpp"
#include "fusecost/allocation.hpp"
#include "fusecost/mapper.hpp"
#include "fusecost/tiling.hpp"

namespace fusecost {

enum class CopyKind : std::uint8_t { Fresh, FromLeft, FromAbove, StoreLeft, StoreAbove };

struct DataCopyAction {
  CopyKind kind = CopyKind::Fresh;
  Operand operand = Operand::I;  // I for gathers into a layer input, O for strips stored from outputs
  std::size_t map = 0;
  std::uint64_t elements = 0;
  std::uint32_t bits_per_element = 8;
  int src = -1, dst = -1;

  std::uint64_t bits() const { return elements * bits_per_element; }
};

struct CopyBundle {
  std::vector<DataCopyAction> actions;
};

struct CopyCost {
  double energy_pJ = 0;
  double latency_cycles = 0;
  std::vector<std::array<AccessCount, 3>> access;  // [global level][operand]
};

// Where each map of the stack lives during one tile.
struct Residency {
  std::vector<int> fresh;       // level holding the fresh part (producer O top, DRAM for entering maps)
  std::vector<int> left;        // cached-left strip level
  std::vector<int> row;         // cached-row strip level
  std::vector<int> store_from;  // level strips are stored from
};

Residency residency(const StackGeometry& geom, const Placement& placement, const Accelerator& acc);

struct LayerCopies {
  CopyBundle gather;  // before the layer runs
  CopyBundle store;   // after it, filling cache strips for later tiles
};

LayerCopies plan_copy_actions(const StackGeometry& geom, const TileAttr& attr, const Placement& placement,
                              const Residency& where, std::size_t layer_idx);

// Chain of levels a copy traverses, endpoints included.
std::vector<int> route(const Accelerator& acc, int src, int dst);

CopyCost price_bundle(const CopyBundle& bundle, const Accelerator& acc);

}  // namespace fusecost

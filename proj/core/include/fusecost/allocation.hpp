// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fusecost/accelerator.hpp"
#include "fusecost/tiling.hpp"

namespace fusecost {

enum class DataCategory : std::uint8_t { I = 0, O = 1, CachedLeft = 2, CachedRow = 3 };
inline constexpr std::size_t kNumCategories = 4;
constexpr std::size_t index(DataCategory c) { return static_cast<std::size_t>(c); }
std::string_view to_string(DataCategory c);
std::optional<DataCategory> data_category_from_string(std::string_view s);

struct LayerDemand {
  int layer_id = 0;
  std::array<std::uint64_t, kNumCategories> bits{};
  bool output_to_dram = false;  // stack output layer
};

struct DataDemand {
  std::vector<LayerDemand> layers;  // stack order
  std::uint64_t weight_bits = 0;    // stack working set
  int weight_resident_level = -1;   // where the working set lives between tiles
  int weight_top_level = -1;        // W top for this tile type
};

struct LayerPlacement {
  int layer_id = 0;
  std::array<int, kNumCategories> level{};  // global level indices
  int weight_level = -1;
};

struct Placement {
  std::vector<LayerPlacement> layers;
  int weight_resident_level = -1;
  std::uint64_t weight_bits = 0;
};

struct AllocatorOptions {
  std::array<DataCategory, kNumCategories> priority{DataCategory::I, DataCategory::O, DataCategory::CachedLeft,
                                                    DataCategory::CachedRow};
};

struct WeightSchedule {
  int resident_level = -1;     // DRAM when the stack weights fit nowhere on-chip
  std::vector<int> per_type;   // W top level per tile type
};

// Lowest shared (non per-PE) on-chip W level able to hold the stack weights, else DRAM.
int weight_resident_level(const Accelerator& acc, std::uint64_t stack_weight_bits);
WeightSchedule weight_level_schedule(const StackGeometry& geom, const std::vector<TileType>& types,
                                     const Accelerator& acc);

// Cache strips of a map are charged to its first in-stack consumer.
DataDemand build_demand(const StackGeometry& geom, const TileAttr& attr, std::uint64_t weight_bits,
                        int weight_resident_level, int weight_top_level);

Placement assign_top_memories(const DataDemand& demand, const Accelerator& acc,
                              const AllocatorOptions& opts = {});

// Caps I, O and W chains at the placed levels for one layer evaluation.
Accelerator derive_capped_accelerator(const LayerPlacement& placement, const Accelerator& acc);

// Replays the layer steps of one tile and reports every over-full level.
std::vector<std::string> audit_capacity(const DataDemand& demand, const Placement& placement,
                                        const Accelerator& acc);

}  // namespace fusecost

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fusecost/stack_plan.hpp"
#include "fusecost/workload.hpp"

namespace fusecost {

enum class OverlapMode : std::uint8_t { FullyRecompute = 0, HCachedVRecompute = 1, FullyCached = 2 };
inline constexpr OverlapMode kModes[] = {OverlapMode::FullyRecompute, OverlapMode::HCachedVRecompute,
                                         OverlapMode::FullyCached};

std::string_view to_string(OverlapMode m);
OverlapMode overlap_mode_from_int(int m);

inline bool caches_horizontally(OverlapMode m) { return m != OverlapMode::FullyRecompute; }
inline bool caches_vertically(OverlapMode m) { return m == OverlapMode::FullyCached; }

// Inclusive feature coordinates. Empty when x1 < x0 or y1 < y0.
struct Region {
  std::int64_t x0 = 0, y0 = 0, x1 = -1, y1 = -1;

  std::int64_t width() const { return x1 >= x0 ? x1 - x0 + 1 : 0; }
  std::int64_t height() const { return y1 >= y0 ? y1 - y0 + 1 : 0; }
  std::int64_t area() const { return width() * height(); }
  bool empty() const { return width() == 0 || height() == 0; }
  bool operator==(const Region& o) const {
    if (empty() && o.empty()) return true;
    return x0 == o.x0 && y0 == o.y0 && x1 == o.x1 && y1 == o.y1;
  }
};

std::string to_string(const Region& r);

// Envelope of per-branch requirements on one feature map.
Region merge_branch_cache(const std::vector<Region>& regions);

struct TileGrid {
  std::int64_t width = 0, height = 0, tx = 0, ty = 0;
  std::int64_t cols = 0, rows = 0;

  Region tile(std::int64_t col, std::int64_t row) const;
  std::int64_t count() const { return cols * rows; }
};

// Throws ValidationError when the tile size is out of range.
TileGrid tile_grid(std::int64_t width, std::int64_t height, std::int64_t tx, std::int64_t ty);
std::vector<Region> tile_regions(const TileGrid& grid);

// A feature map touched by a stack: the output of a member layer, or a map
// entering the stack (another stack's output or the network input).
struct FeatureMap {
  int id = 0;          // producer layer id, or -1 - consumer id for a network input
  int producer = -1;   // member layer id, -1 when the map enters the stack
  std::int64_t width = 0, height = 0, channels = 0;
  int bits = 8;
  std::vector<int> consumers;  // member layers reading it, topological order
  bool is_source() const { return producer < 0; }
};

class StackGeometry {
 public:
  StackGeometry(const WorkloadGraph& g, const Stack& stack);

  const WorkloadGraph& graph() const { return *g_; }
  const Stack& stack() const { return stack_; }
  const std::vector<FeatureMap>& maps() const { return maps_; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }
  std::size_t layer_count() const { return layers_.size(); }
  // Map index of a member layer's output.
  std::size_t output_map(std::size_t layer_idx) const { return out_map_[layer_idx]; }
  // Map indices read by a member layer, in predecessor order.
  const std::vector<std::size_t>& input_maps(std::size_t layer_idx) const { return in_maps_[layer_idx]; }
  std::size_t final_map() const { return out_map_.back(); }
  std::int64_t out_width() const { return layers_.back()->OX; }
  std::int64_t out_height() const { return layers_.back()->OY; }
  // Largest consumer stride of a map along an axis (1 if none).
  int phase_stride(std::size_t map, int axis) const;

 private:
  const WorkloadGraph* g_;
  Stack stack_;
  std::vector<const Layer*> layers_;
  std::vector<FeatureMap> maps_;
  std::vector<std::size_t> out_map_;
  std::vector<std::vector<std::size_t>> in_maps_;
};

// Per-map data of one tile. Cache sizes are element counts (channels included).
struct MapTileData {
  Region required;  // union over in-stack consumers, or the tile itself for the final map
  Region fresh;     // computed (or fetched, for entering maps) during this tile
  std::uint64_t from_left = 0, from_above = 0;
  std::uint64_t to_left = 0, to_above = 0;
  std::uint64_t live_left = 0, live_row = 0;
  std::int64_t phase_x = 0, phase_y = 0;

  bool operator==(const MapTileData&) const = default;
};

struct TileAttr {
  std::int64_t col = 0, row = 0;
  bool first_col = false, last_col = false, first_row = false, last_row = false;
  bool opens_stack = false;
  std::vector<MapTileData> maps;  // indexed like StackGeometry::maps()

  // Signature excluding grid position.
  std::vector<std::int64_t> signature() const;
};

TileAttr backcalc(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid, std::int64_t col,
                  std::int64_t row);

struct TileType {
  TileAttr attr;  // representative (first in row-major order)
  std::uint64_t multiplicity = 0;
};

std::vector<TileType> identify_tile_types(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid);

// MACs of one tile: sum over member layers of to-compute area x K x per-output MACs.
std::uint64_t tile_macs(const StackGeometry& geom, const TileAttr& attr);
std::uint64_t mac_count(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid);

}  // namespace fusecost

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fusecost/accelerator.hpp"
#include "fusecost/mapper.hpp"
#include "fusecost/tiling.hpp"
#include "fusecost/workload.hpp"

namespace fusecost::testing {

std::filesystem::path config_path(const std::string& kind, const std::string& name);
WorkloadGraph shipped_workload(const std::string& name);
Accelerator shipped_accelerator(const std::string& name);

// Linear chain of 1..max_layers convs built backwards from a random output,
// every map at most max_extent on a side.
WorkloadGraph random_chain(std::mt19937_64& rng, int max_layers, std::int64_t max_extent);

struct TinyCase {
  LayerInstance layer;
  Accelerator acc;
};

// Bounds <= 4, spatial factors dividing the bounds, one on-chip level per
// operand (possibly per-PE, possibly shared) above DRAM.
TinyCase random_tiny_case(std::mt19937_64& rng);

struct SignatureCount {
  std::uint64_t count = 0;
  std::int64_t first_col = 0, first_row = 0;
};

// Runs backcalc on every tile and groups by signature.
std::map<std::vector<std::int64_t>, SignatureCount> enumerate_signatures(const StackGeometry& geom, OverlapMode mode,
                                                                         const TileGrid& grid);

// Sum over layers of OX*OY*K*macs_per_output from the layer table alone.
std::uint64_t layer_by_layer_macs(const WorkloadGraph& g);

}  // namespace fusecost::testing

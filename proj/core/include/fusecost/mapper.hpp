// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fusecost/accelerator.hpp"
#include "fusecost/workload.hpp"

namespace fusecost {

struct LayerInstance {
  LayerKind kind = LayerKind::Conv;
  DimArray bounds{1, 1, 1, 1, 1, 1};  // K, C, OX, OY, FX, FY (tile-local OX/OY)
  int stride_x = 1, stride_y = 1;
  int input_bits = 8, output_bits = 8, weight_bits = 8;
  int input_operands = 1;  // 2 for elementwise-add

  static LayerInstance from_layer(const Layer& l, std::int64_t ox, std::int64_t oy);
  std::uint64_t mac_count() const;
  bool has_weights() const { return kind == LayerKind::Conv || kind == LayerKind::DepthwiseConv; }
  bool channelwise() const { return kind != LayerKind::Conv; }
  std::string key() const;
  bool operator==(const LayerInstance&) const = default;
};

struct Loop {
  LoopDim dim = LoopDim::K;
  std::int64_t factor = 1;
  auto operator<=>(const Loop&) const = default;
};

struct TemporalMapping {
  std::vector<Loop> loops;               // innermost first
  std::array<std::vector<int>, 3> cuts;  // per operand, one per capped-chain level; last == loops.size()
  DimArray spatial{1, 1, 1, 1, 1, 1};    // effective unrolling
};

std::string to_string(const TemporalMapping& m, const class Accelerator& acc);

struct AccessCount {
  std::uint64_t read_elements = 0, write_elements = 0;
  std::uint64_t read_words = 0, write_words = 0;
  double energy_pJ = 0;
};

struct LayerCost {
  double energy_pJ = 0;
  double mac_energy_pJ = 0;
  double latency_cycles = 0;
  double ideal_cycles = 0;
  double stall_cycles = 0;
  double prep_cycles = 0;
  double spatial_utilization = 0;
  std::uint64_t macs = 0;
  std::vector<std::array<AccessCount, 3>> access;  // [global level][operand]
};

enum class Target : std::uint8_t { Energy, Latency, EDP, Weighted };
std::string_view to_string(Target t);
std::optional<Target> target_from_string(std::string_view s);

struct Objective {
  Target target = Target::Energy;
  double energy_weight = 1.0;
  double latency_weight = 0.0;
  double score(double energy_pJ, double latency_cycles) const;
};

// Effective spatial factor per dim: min(unrolling, bound).
DimArray effective_spatial(const LayerInstance& layer, const Accelerator& acc);
DimArray temporal_bounds(const LayerInstance& layer, const DimArray& spatial);

// Prime factors per dim, merged down to lpf_limit; then every further merge
// step down to one factor per dim. The first entry has at most lpf_limit loops
// whenever some merge can reach it.
std::vector<std::vector<Loop>> factorization_chain(const DimArray& temporal, int lpf_limit);

// Greedy bottom-up assignment of loops to memory levels for a fixed ordering.
// Returns nullopt when the lowest level cannot hold even one element.
std::optional<TemporalMapping> allocate_loops(const std::vector<Loop>& ordering, const LayerInstance& layer,
                                              const Accelerator& capped);

// Throws CapacityError when the mapping does not respect level capacities.
LayerCost evaluate_mapping(const TemporalMapping& mapping, const LayerInstance& layer, const Accelerator& capped);

// Empty when legal.
std::vector<std::string> audit_mapping(const TemporalMapping& mapping, const LayerInstance& layer,
                                       const Accelerator& capped);

struct SearchResult {
  TemporalMapping mapping;
  LayerCost cost;
  std::uint64_t evaluated = 0;
};

SearchResult search_mapping(const LayerInstance& layer, const Accelerator& capped, int lpf_limit,
                            const Objective& objective = {});

}  // namespace fusecost

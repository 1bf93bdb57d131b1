// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusecost/accelerator.hpp"
#include "fusecost/allocation.hpp"
#include "fusecost/copy_cost.hpp"
#include "fusecost/mapper.hpp"
#include "fusecost/stack_plan.hpp"
#include "fusecost/tiling.hpp"
#include "fusecost/workload.hpp"

namespace fusecost {

enum class Cause : std::uint8_t { LayerActivation = 0, LayerWeight = 1, CopyAction = 2 };
std::string_view to_string(Cause c);
std::string_view short_name(Cause c);

// Dense level x operand x cause table.
struct Breakdown {
  std::vector<std::array<std::array<AccessCount, 3>, 3>> cells;

  explicit Breakdown(std::size_t levels = 0) : cells(levels) {}
  AccessCount& at(int level, Operand op, Cause c) {
    return cells[static_cast<std::size_t>(level)][index(op)][static_cast<std::size_t>(c)];
  }
  const AccessCount& at(int level, Operand op, Cause c) const {
    return cells[static_cast<std::size_t>(level)][index(op)][static_cast<std::size_t>(c)];
  }
  void add(const std::vector<std::array<AccessCount, 3>>& access, Cause copy_or_layer, std::uint64_t mult);
  void add(const Breakdown& o);
  // start + cell energies, added in (level, operand, cause) order. Totals use
  // start = MAC energy so they equal a left-to-right sum of the CSV columns.
  double memory_energy_pJ(double start = 0) const;
  std::uint64_t total_elements() const;
};

struct StackStrategy {
  std::int64_t tile_x = 1, tile_y = 1;
  OverlapMode mode = OverlapMode::FullyCached;
  bool operator==(const StackStrategy&) const = default;
};

struct DFStrategy {
  StackPlan plan;
  std::vector<StackStrategy> stacks;  // one per plan stack
};

struct LayerEval {
  int layer_id = 0;
  LayerInstance instance;
  TemporalMapping mapping;
  LayerCost cost;
  CopyCost gather, store;
  bool computed = false;
};

struct TileTypeResult {
  TileAttr attr;
  std::uint64_t multiplicity = 0;
  Placement placement;
  std::vector<LayerEval> layers;
  double energy_pJ = 0, latency_cycles = 0;
};

struct StackResult {
  std::size_t stack_index = 0;
  StackStrategy strategy;
  std::uint64_t tile_count = 0, tile_type_count = 0, macs = 0;
  double energy_pJ = 0, latency_cycles = 0, mac_energy_pJ = 0;
  int weight_resident_level = -1;
  Breakdown breakdown;
  std::vector<TileTypeResult> types;  // only with EngineOptions::keep_details
};

struct CostResult {
  double energy_pJ = 0, latency_cycles = 0, mac_energy_pJ = 0;
  std::uint64_t macs = 0, tile_type_count = 0;
  Breakdown breakdown;
  std::vector<StackResult> stacks;
};

struct EngineOptions {
  int lpf_limit = 8;
  Objective objective;
  AllocatorOptions allocator;
  bool keep_details = false;
};

class Engine {
 public:
  Engine(const WorkloadGraph& g, const Accelerator& acc, EngineOptions opts = {});

  const WorkloadGraph& graph() const { return g_; }
  const Accelerator& accelerator() const { return acc_; }
  const EngineOptions& options() const { return opts_; }

  CostResult evaluate(const DFStrategy& strategy) const;
  StackResult evaluate_stack(const Stack& stack, std::size_t stack_index, const StackStrategy& s) const;

  // Memoized per (layer instance, capped chains).
  std::shared_ptr<const SearchResult> mapping_for(const LayerInstance& inst, const std::array<int, 3>& caps) const;
  std::uint64_t mapper_searches() const;

 private:
  const WorkloadGraph& g_;
  const Accelerator& acc_;
  EngineOptions opts_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::shared_ptr<const SearchResult>> memo_;
};

// Uniform strategy for every stack; tile sizes larger than a stack's output are clamped to it.
DFStrategy uniform_strategy(const WorkloadGraph& g, const StackPlan& plan, std::int64_t tx, std::int64_t ty,
                            OverlapMode mode);

struct SweepSpec {
  std::vector<std::int64_t> tile_x, tile_y;
  std::vector<OverlapMode> modes;
};

SweepSpec default_sweep_spec();

struct SweepRow {
  std::string strategy_id;
  std::int64_t tile_x = 0, tile_y = 0;
  OverlapMode mode = OverlapMode::FullyCached;
  std::optional<CostResult> result;
  std::string error;
  bool skipped = false;  // resumed from an existing table
};

std::string strategy_id(OverlapMode mode, std::int64_t tx, std::int64_t ty);

// Rows in grid order (mode, tile_x, tile_y). Ids in `skip` are not evaluated.
std::vector<SweepRow> sweep(const Engine& engine, const StackPlan& plan, const SweepSpec& spec, int threads = 1,
                            const std::set<std::string>& skip = {});

// Index of the best successful row under the objective; ties go to the first.
std::optional<std::size_t> best_row(const std::vector<SweepRow>& rows, const Objective& objective);

// Per-stack argmin over candidate strategies; ties go to the first listed.
DFStrategy best_combination(const Engine& engine, const StackPlan& plan,
                            const std::vector<std::vector<StackStrategy>>& candidates);

}  // namespace fusecost

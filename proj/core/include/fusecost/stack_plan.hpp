// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusecost/accelerator.hpp"
#include "fusecost/workload.hpp"

namespace fusecost {

struct Stack {
  std::vector<int> layer_ids;  // topological order
  int output_layer = -1;

  bool contains(int id) const;
  // Layers reading at least one map produced outside the stack.
  std::vector<int> input_layers(const WorkloadGraph& g) const;
  std::uint64_t weight_bits(const WorkloadGraph& g) const;
  bool operator==(const Stack&) const = default;
};

struct StackPlan {
  std::vector<Stack> stacks;
  bool operator==(const StackPlan&) const = default;
};

// Positions p (1..n-1) in topological order where cutting before layer p
// leaves only edges from layer p-1 crossing the cut.
std::vector<std::size_t> branch_free_cuts(const WorkloadGraph& g);

// Capacity used by auto_stack: the highest on-chip level on the W chain
// (per-instance capacity for per-PE levels), 0 if weights live off-chip only.
std::uint64_t stack_weight_capacity_bits(const Accelerator& acc);

StackPlan auto_stack(const WorkloadGraph& g, const Accelerator& acc);
StackPlan auto_stack(const WorkloadGraph& g, std::uint64_t weight_capacity_bits);
StackPlan explicit_plan(const WorkloadGraph& g, const std::vector<std::vector<int>>& stacks);
StackPlan single_layer_plan(const WorkloadGraph& g);
StackPlan whole_graph_plan(const WorkloadGraph& g);

// Throws ValidationError naming the violated invariant.
void validate_plan(const WorkloadGraph& g, const StackPlan& plan);

std::string describe(const StackPlan& plan);

}  // namespace fusecost

// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "fusecost/error.hpp"
#include "fusecost/stack_plan.hpp"
#include "support.hpp"

using namespace fusecost;
using fusecost::testing::shipped_accelerator;
using fusecost::testing::shipped_workload;

namespace {

Layer conv(int id, std::int64_t k, std::int64_t c, std::vector<int> pred, std::int64_t f = 3) {
  Layer l;
  l.id = id;
  l.K = k;
  l.C = c;
  l.OX = l.OY = 8;
  l.FX = l.FY = f;
  const int p = static_cast<int>(f / 2);
  l.pad_left = l.pad_right = l.pad_top = l.pad_bottom = p;
  l.predecessors = std::move(pred);
  return l;
}

// 1 -> 2 -> {3, 4} -> 5(add) -> 6, with a heavy branch region.
WorkloadGraph branch_toy6() {
  Layer add;
  add.id = 5;
  add.kind = LayerKind::Add;
  add.K = add.C = 16;
  add.OX = add.OY = 8;
  add.predecessors = {3, 4};
  return WorkloadGraph("toy6", {conv(1, 4, 3, {}), conv(2, 16, 4, {1}), conv(3, 16, 16, {2}), conv(4, 16, 16, {2}),
                                add, conv(6, 4, 16, {5})});
}

std::vector<std::vector<int>> ids(const StackPlan& p) {
  std::vector<std::vector<int>> out;
  for (const auto& s : p.stacks) out.push_back(s.layer_ids);
  return out;
}

}  // namespace

TEST(StackPlan, FsrcnnFusesWhole) {
  auto plan = auto_stack(shipped_workload("fsrcnn_like"), shipped_accelerator("meta_proto_df"));
  ASSERT_EQ(plan.stacks.size(), 1u);
  EXPECT_EQ(plan.stacks[0].layer_ids.size(), 8u);
}

TEST(StackPlan, SingleLayerNetwork) {
  WorkloadGraph g("one", {conv(1, 4, 3, {})});
  auto plan = auto_stack(g, shipped_accelerator("meta_proto_df"));
  EXPECT_EQ(ids(plan), (std::vector<std::vector<int>>{{1}}));
}

TEST(StackPlan, BranchFreeCuts) {
  auto g = branch_toy6();
  EXPECT_EQ(branch_free_cuts(g), (std::vector<std::size_t>{1, 2, 5}));
}

TEST(StackPlan, HeavyBranchRegionSplits) {
  // Weights in bits: L1 108*8, L2 576*8, L3 2304*8, L4 2304*8, L5 0, L6 576*8.
  auto g = branch_toy6();
  // Segments: [1] [2] [3 4 5] [6]; the branch segment (4608 weights) exceeds 4000*8 bits.
  auto plan = auto_stack(g, 4000u * 8);
  EXPECT_EQ(ids(plan), (std::vector<std::vector<int>>{{1, 2}, {3}, {4}, {5}, {6}}));
  validate_plan(g, plan);
  // With room for everything the whole graph is one stack.
  EXPECT_EQ(auto_stack(g, 1u << 20).stacks.size(), 1u);
}

TEST(StackPlan, TpuForcesSingleLayerStacks) {
  auto g = shipped_workload("fsrcnn_like");
  auto plan = auto_stack(g, shipped_accelerator("tpu"));
  EXPECT_EQ(plan, single_layer_plan(g));
}

TEST(StackPlan, ExplicitPlans) {
  auto g = branch_toy6();
  EXPECT_EQ(explicit_plan(g, {{1}, {2}, {3}, {4}, {5}, {6}}), single_layer_plan(g));
  EXPECT_EQ(explicit_plan(g, {{1, 2, 3, 4, 5, 6}}), whole_graph_plan(g));
  // Layer 3 feeds the add outside its stack without being the stack output.
  EXPECT_THROW(explicit_plan(g, {{1, 2}, {3, 4}, {5, 6}}), ValidationError);
  EXPECT_THROW(explicit_plan(g, {{1, 3}, {2, 4, 5, 6}}), ValidationError);
  EXPECT_THROW(explicit_plan(g, {{1, 2}}), ValidationError);
  EXPECT_THROW(explicit_plan(g, {{1, 2, 9}}), ValidationError);
}

TEST(StackPlan, AutoStackFuzz) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = fusecost::testing::random_chain(rng, 4, 32);
    std::uint64_t prev_count = ~0ull;
    for (std::uint64_t cap : {0ull, 64ull, 512ull, 4096ull, 1ull << 20}) {
      auto plan = auto_stack(g, cap);
      EXPECT_NO_THROW(validate_plan(g, plan));
      EXPECT_LE(plan.stacks.size(), prev_count);
      prev_count = plan.stacks.size();
    }
  }
}

TEST(StackPlan, StackInputs) {
  auto g = branch_toy6();
  Stack s{{3, 4, 5}, 5};
  EXPECT_EQ(s.input_layers(g), (std::vector<int>{3, 4}));
  EXPECT_EQ(s.weight_bits(g), 2u * 2304 * 8);
}

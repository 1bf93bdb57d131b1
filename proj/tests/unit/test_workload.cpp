// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fusecost/error.hpp"
#include "fusecost/workload.hpp"
#include "support.hpp"

using namespace fusecost;

namespace {

const char* kSingleConv = R"({"name":"one","layers":[
  {"id":1,"kind":"conv","K":16,"C":3,"OX":8,"OY":8,"FX":3,"FY":3,"stride":[1,1],"pad":[1,1,1,1]}]})";

}  // namespace

TEST(Workload, SingleConvWeightCount) {
  auto g = parse_workload(kSingleConv);
  ASSERT_EQ(g.layers().size(), 1u);
  EXPECT_EQ(g.layers()[0].weight_count(), 16u * 3 * 3 * 3);
  EXPECT_EQ(weight_size_bits(g.layers()[0]), 3456u);
  EXPECT_EQ(g.layers()[0].input_width(), 8);
}

TEST(Workload, PoolingHasNoWeights) {
  Layer l;
  l.kind = LayerKind::Pooling;
  l.K = l.C = 4;
  l.FX = l.FY = 2;
  EXPECT_EQ(weight_size_bits(l), 0u);
  EXPECT_EQ(l.macs_per_output(), 4);
}

TEST(Workload, DepthwiseWeightsIgnoreK) {
  Layer l;
  l.kind = LayerKind::DepthwiseConv;
  l.K = l.C = 8;
  l.FX = l.FY = 3;
  EXPECT_EQ(weight_size_bits(l), 8u * 9 * 8);
}

TEST(Workload, FsrcnnShape) {
  auto g = fusecost::testing::shipped_workload("fsrcnn_like");
  const Layer& last = g.layer(g.final_layer());
  EXPECT_EQ(last.OX, 960);
  EXPECT_EQ(last.OY, 540);
  EXPECT_EQ(g.total_weight_bits() / 8, 15992u);
  EXPECT_NEAR(static_cast<double>(g.total_weight_bits()) / 8 / 1024, 15.6, 0.05);
  EXPECT_EQ(g.total_macs(), fusecost::testing::layer_by_layer_macs(g));
}

TEST(Workload, ReferenceNetShape) {
  auto g = fusecost::testing::shipped_workload("reference_11");
  ASSERT_EQ(g.layers().size(), 11u);
  for (std::size_t i = 0; i + 1 < g.layers().size(); ++i) {
    EXPECT_EQ(g.layers()[i].K, 32);
    EXPECT_EQ(g.layers()[i].FX, 3);
  }
  EXPECT_EQ(g.layers().back().K, 16);
}

TEST(Workload, InconsistentPredecessorNamesLayer) {
  const char* doc = R"({"layers":[
    {"id":1,"kind":"conv","K":4,"C":3,"OX":8,"OY":8,"FX":3,"FY":3},
    {"id":2,"kind":"conv","K":4,"C":4,"OX":8,"OY":8,"FX":3,"FY":3,"predecessors":[1]}]})";
  try {
    parse_workload(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 2"), std::string::npos) << e.what();
  }
}

TEST(Workload, SyntaxErrorReportsOffset) {
  try {
    parse_workload(R"({"layers": [ {"id": 1,, }]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.offset(), 0u);
  }
}

TEST(Workload, RejectsBatchOtherThanOne) {
  const char* doc = R"({"layers":[{"id":1,"kind":"conv","K":1,"C":1,"OX":2,"OY":2,"FX":1,"FY":1,"B":2}]})";
  EXPECT_THROW(parse_workload(doc), ValidationError);
}

TEST(Workload, RejectsStructuralErrors) {
  Layer a;
  a.id = 1;
  Layer b = a;
  b.id = 2;
  EXPECT_THROW(WorkloadGraph("two-finals", {a, b}), ValidationError);
  Layer c = a;
  c.predecessors = {2};
  Layer d = b;
  d.predecessors = {1};
  EXPECT_THROW(WorkloadGraph("cycle", {c, d}), ValidationError);
  Layer dw = a;
  dw.kind = LayerKind::DepthwiseConv;
  dw.K = 2;
  EXPECT_THROW(WorkloadGraph("dw", {dw}), ValidationError);
  Layer bad = a;
  bad.stride_x = 0;
  EXPECT_THROW(WorkloadGraph("stride", {bad}), ValidationError);
  EXPECT_THROW(WorkloadGraph("empty", {}), ValidationError);
}

TEST(Workload, AddNeedsUnitKernel) {
  auto g = fusecost::testing::shipped_workload("branch_toy");
  std::vector<Layer> layers = g.layers();
  for (Layer& l : layers)
    if (l.kind == LayerKind::Add) l.FX = 3;
  EXPECT_THROW(WorkloadGraph("bad-add", layers), ValidationError);
}

TEST(Workload, TopologicalOrderPrefersSmallIds) {
  Layer l1, l2, l3, l4;
  l1.id = 10;
  l2.id = 3;
  l2.predecessors = {10};
  l3.id = 2;
  l3.predecessors = {10};
  l4.id = 7;
  l4.kind = LayerKind::Add;
  l4.predecessors = {3, 2};
  WorkloadGraph g("order", {l4, l3, l2, l1});
  std::vector<int> ids;
  for (const Layer& l : g.layers()) ids.push_back(l.id);
  EXPECT_EQ(ids, (std::vector<int>{10, 2, 3, 7}));
  EXPECT_EQ(g.final_layer(), 7);
}

TEST(Workload, RoundTrip) {
  for (const char* name : {"fsrcnn_like", "branch_toy", "reference_11"}) {
    auto g = fusecost::testing::shipped_workload(name);
    EXPECT_EQ(parse_workload(serialize_workload(g)), g) << name;
  }
}

TEST(Workload, MissingFileNamesPath) {
  try {
    load_workload("/nonexistent/net.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/net.json"), std::string::npos);
  }
}

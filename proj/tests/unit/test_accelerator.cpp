// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fusecost/accelerator.hpp"
#include "fusecost/error.hpp"
#include "support.hpp"

using namespace fusecost;
using fusecost::testing::shipped_accelerator;

namespace {

std::vector<std::string> names(const std::vector<MemoryLevel>& chain) {
  std::vector<std::string> out;
  for (const auto& m : chain) out.push_back(m.name);
  return out;
}

const std::vector<std::string> kAll{"meta_proto", "meta_proto_df", "tpu",       "tpu_df",    "edge_tpu",
                                    "edge_tpu_df", "ascend",       "ascend_df", "tesla_npu", "tesla_npu_df"};

}  // namespace

TEST(Accelerator, MetaProtoDfShape) {
  auto acc = shipped_accelerator("meta_proto_df");
  EXPECT_EQ(acc.mac_count(), 1024u);
  EXPECT_EQ(acc.level(acc.level_index("W_LB")).capacity_bits, 32u * 1024 * 8);
  EXPECT_EQ(acc.level(acc.level_index("GB")).capacity_bits, 2u * 1024 * 1024 * 8);
  EXPECT_EQ(acc.level(acc.dram_level()).ports.front().bw_bits_per_cycle, 64);
  EXPECT_EQ(names(operand_chain(acc, Operand::W)), (std::vector<std::string>{"W_reg", "W_LB", "GB", "DRAM"}));
  EXPECT_EQ(names(operand_chain(acc, Operand::I)), (std::vector<std::string>{"I_reg", "IO_LB", "GB", "DRAM"}));
  EXPECT_EQ(names(operand_chain(acc, Operand::O)), (std::vector<std::string>{"O_reg", "IO_LB", "GB", "DRAM"}));
}

TEST(Accelerator, TpuHasNoOnchipWeightBuffer) {
  auto acc = shipped_accelerator("tpu");
  EXPECT_EQ(names(operand_chain(acc, Operand::W)), (std::vector<std::string>{"W_reg", "DRAM"}));
  EXPECT_EQ(acc.highest_onchip_weight_level(), acc.level_index("W_reg"));
}

TEST(Accelerator, EveryChainEndsAtDram) {
  for (const auto& n : kAll) {
    auto acc = shipped_accelerator(n);
    for (Operand op : kOperands) EXPECT_EQ(acc.chain(op).back(), acc.dram_level()) << n;
    EXPECT_EQ(acc.spatial().product(), acc.mac_count()) << n;
  }
}

TEST(Accelerator, DfVariantsKeepOnchipCapacity) {
  for (const auto& base : {"meta_proto", "tpu", "edge_tpu", "ascend", "tesla_npu"}) {
    auto a = shipped_accelerator(base);
    auto b = shipped_accelerator(std::string(base) + "_df");
    auto shared = [](const Accelerator& acc) {
      std::uint64_t t = 0;
      for (const auto& m : acc.levels())
        if (!m.offchip && !m.per_pe) t += m.capacity_bits;
      return t;
    };
    EXPECT_EQ(shared(a), shared(b)) << base;
    EXPECT_EQ(a.spatial(), b.spatial()) << base;
  }
}

TEST(Accelerator, ChainSkippingDramIsRejected) {
  auto text = serialize_accelerator(shipped_accelerator("meta_proto_df"));
  auto doc = nlohmann::json::parse(text);
  for (auto& l : doc["memory_levels"])
    if (l["offchip"].get<bool>()) l["serves"] = {"I", "O"};
  EXPECT_THROW(parse_accelerator(doc.dump()), ValidationError);
}

TEST(Accelerator, RejectsBadDocuments) {
  EXPECT_THROW(parse_accelerator("{"), ParseError);
  auto doc = nlohmann::json::parse(serialize_accelerator(shipped_accelerator("meta_proto")));
  doc["memory_levels"][0]["capacity_bits"] = 0;
  EXPECT_THROW(parse_accelerator(doc.dump()), ValidationError);
  doc = nlohmann::json::parse(serialize_accelerator(shipped_accelerator("meta_proto")));
  doc["spatial_unrolling"].push_back({"K", 4});
  EXPECT_THROW(parse_accelerator(doc.dump()), ValidationError);
}

TEST(Accelerator, RoundTrip) {
  for (const auto& n : kAll) {
    auto acc = shipped_accelerator(n);
    EXPECT_EQ(parse_accelerator(serialize_accelerator(acc)), acc) << n;
  }
}

TEST(Accelerator, RestrictTopLevel) {
  auto acc = shipped_accelerator("meta_proto_df");
  EXPECT_EQ(acc.restrict_top_level(acc.full_caps()), acc);
  std::array<int, 3> caps = acc.full_caps();
  caps[index(Operand::I)] = 1;  // IO_LB
  auto capped = acc.restrict_top_level(caps);
  EXPECT_EQ(names(operand_chain(capped, Operand::I)), (std::vector<std::string>{"I_reg", "IO_LB"}));
  EXPECT_EQ(capped.chain(Operand::W), acc.chain(Operand::W));
  EXPECT_EQ(acc.chain(Operand::I).size(), 4u);
  // idempotent, and composing with a lower cap equals the lower cap
  EXPECT_EQ(capped.restrict_top_level(caps), capped);
  std::array<int, 3> lower = caps;
  lower[index(Operand::I)] = 0;
  EXPECT_EQ(capped.restrict_top_level(lower), acc.restrict_top_level(lower));
  std::array<int, 3> bad = caps;
  bad[index(Operand::O)] = -1;
  EXPECT_THROW(acc.restrict_top_level(bad), ValidationError);
}

TEST(Accelerator, TpuWeightCapAtDramIsUnchanged) {
  auto acc = shipped_accelerator("tpu");
  auto caps = acc.full_caps();
  EXPECT_EQ(acc.restrict_top_level(caps).chain(Operand::W), acc.chain(Operand::W));
}

TEST(Accelerator, SharedLevelAppearsInBothChains) {
  auto acc = shipped_accelerator("edge_tpu_df");
  const int io = acc.level_index("IO_LB");
  EXPECT_GE(acc.chain_position(Operand::I, io), 0);
  EXPECT_GE(acc.chain_position(Operand::O, io), 0);
  EXPECT_EQ(acc.chain_position(Operand::W, io), -1);
}

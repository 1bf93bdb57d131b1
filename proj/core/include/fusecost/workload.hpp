// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fusecost/types.hpp"

namespace fusecost {

enum class LayerKind : std::uint8_t { Conv, DepthwiseConv, Pooling, Add };

std::string_view to_string(LayerKind k);
std::optional<LayerKind> layer_kind_from_string(std::string_view s);

struct Layer {
  int id = 0;
  LayerKind kind = LayerKind::Conv;
  std::int64_t K = 1, C = 1, OX = 1, OY = 1, FX = 1, FY = 1;
  int stride_x = 1, stride_y = 1;
  int pad_left = 0, pad_right = 0, pad_top = 0, pad_bottom = 0;
  std::vector<int> predecessors;
  int act_bits = 8;
  int weight_bits = 8;

  std::int64_t input_width() const { return (OX - 1) * stride_x + FX - pad_left - pad_right; }
  std::int64_t input_height() const { return (OY - 1) * stride_y + FY - pad_top - pad_bottom; }
  std::int64_t input_channels() const { return C; }

  // MACs per output feature (all channels of one output pixel excluded).
  std::int64_t macs_per_output() const;
  std::uint64_t mac_count() const;
  std::uint64_t weight_count() const;
  bool has_weights() const { return kind == LayerKind::Conv || kind == LayerKind::DepthwiseConv; }
  // Channel count of the input feature touched per output channel group.
  bool channelwise() const { return kind != LayerKind::Conv; }

  bool operator==(const Layer&) const = default;
};

std::uint64_t weight_size_bits(const Layer& layer);
std::uint64_t stack_weight_size_bits(const std::vector<const Layer*>& layers);

class WorkloadGraph {
 public:
  WorkloadGraph() = default;
  // Validates and orders. Throws ValidationError.
  WorkloadGraph(std::string name, std::vector<Layer> layers);

  const std::string& name() const { return name_; }
  // Layers in deterministic topological order.
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(int id) const;
  bool contains(int id) const { return pos_.count(id) != 0; }
  std::size_t position(int id) const;
  const std::vector<int>& successors(int id) const;
  int final_layer() const { return layers_.back().id; }
  std::vector<int> input_layers() const;
  std::uint64_t total_macs() const;
  std::uint64_t total_weight_bits() const;

  bool operator==(const WorkloadGraph& o) const { return name_ == o.name_ && layers_ == o.layers_; }

 private:
  std::string name_;
  std::vector<Layer> layers_;
  std::unordered_map<int, std::size_t> pos_;
  std::vector<std::vector<int>> succ_;
};

WorkloadGraph parse_workload(std::string_view text);
std::string serialize_workload(const WorkloadGraph& g);
WorkloadGraph load_workload(const std::filesystem::path& path);

}  // namespace fusecost

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fusecost/types.hpp"

namespace fusecost {

enum class PortDir : std::uint8_t { Read, Write, ReadWrite };

struct Port {
  PortDir dir = PortDir::ReadWrite;
  double bw_bits_per_cycle = 0;
  bool operator==(const Port&) const = default;
};

struct MemoryLevel {
  std::string name;
  std::uint64_t capacity_bits = 0;
  std::uint32_t word_length_bits = 8;
  double read_energy_pJ = 0;
  double write_energy_pJ = 0;
  std::vector<Port> ports;
  std::array<bool, 3> serves{};
  bool offchip = false;
  // One instance per PE; capacity_bits is the per-PE capacity and port
  // bandwidths are the aggregate over all instances.
  bool per_pe = false;
  std::string note;

  bool serves_operand(Operand op) const { return serves[index(op)]; }
  int read_port() const;
  int write_port() const;

  bool operator==(const MemoryLevel&) const = default;
};

struct SpatialUnrolling {
  std::vector<std::pair<LoopDim, int>> factors;

  int factor(LoopDim d) const;
  std::uint64_t product() const;
  bool operator==(const SpatialUnrolling&) const = default;
};

class Accelerator {
 public:
  Accelerator() = default;
  // Validates and derives operand chains. Throws ValidationError.
  Accelerator(std::string name, std::uint64_t mac_count, double unit_mac_energy_pJ, SpatialUnrolling su,
              std::vector<MemoryLevel> levels, std::vector<std::pair<int, int>> direct_paths = {});

  const std::string& name() const { return name_; }
  std::uint64_t mac_count() const { return mac_count_; }
  double unit_mac_energy_pJ() const { return unit_mac_energy_pJ_; }
  const SpatialUnrolling& spatial() const { return spatial_; }
  const std::vector<MemoryLevel>& levels() const { return levels_; }
  const MemoryLevel& level(int idx) const { return levels_[static_cast<std::size_t>(idx)]; }
  int level_index(std::string_view name) const;
  int dram_level() const { return dram_; }

  // Level indices, lowest first. Ends at DRAM unless restricted.
  const std::vector<int>& chain(Operand op) const { return chains_[index(op)]; }
  // Position of a level inside an operand chain, -1 if absent.
  int chain_position(Operand op, int level) const;
  const std::vector<std::pair<int, int>>& direct_paths() const { return direct_paths_; }

  // Truncates each operand chain above the given chain positions.
  Accelerator restrict_top_level(const std::array<int, 3>& caps) const;
  std::array<int, 3> full_caps() const;

  std::uint64_t onchip_capacity_bits() const;
  // Highest on-chip level on the W chain, or -1 if the W chain is DRAM only.
  int highest_onchip_weight_level() const;

  bool operator==(const Accelerator& o) const {
    return name_ == o.name_ && mac_count_ == o.mac_count_ && unit_mac_energy_pJ_ == o.unit_mac_energy_pJ_ &&
           spatial_ == o.spatial_ && levels_ == o.levels_ && chains_ == o.chains_ &&
           direct_paths_ == o.direct_paths_;
  }

 private:
  std::string name_;
  std::uint64_t mac_count_ = 0;
  double unit_mac_energy_pJ_ = 0;
  SpatialUnrolling spatial_;
  std::vector<MemoryLevel> levels_;
  std::array<std::vector<int>, 3> chains_;
  std::vector<std::pair<int, int>> direct_paths_;
  int dram_ = -1;
};

std::vector<MemoryLevel> operand_chain(const Accelerator& acc, Operand op);

Accelerator parse_accelerator(std::string_view text);
std::string serialize_accelerator(const Accelerator& acc);
Accelerator load_accelerator(const std::filesystem::path& path);

}  // namespace fusecost

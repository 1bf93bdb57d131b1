// SPDX-License-Identifier: Apache-2.0
#include "fusecost/allocation.hpp"

#include <algorithm>

#include "fusecost/error.hpp"

namespace fusecost {

std::string_view to_string(DataCategory c) {
  switch (c) {
    case DataCategory::I: return "I";
    case DataCategory::O: return "O";
    case DataCategory::CachedLeft: return "cached-left";
    case DataCategory::CachedRow: return "cached-row";
  }
  return "?";
}

std::optional<DataCategory> data_category_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    auto c = static_cast<DataCategory>(i);
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

int weight_resident_level(const Accelerator& acc, std::uint64_t stack_weight_bits) {
  for (int lv : acc.chain(Operand::W)) {
    const MemoryLevel& m = acc.level(lv);
    if (m.offchip || m.per_pe) continue;
    if (stack_weight_bits <= m.capacity_bits) return lv;
  }
  return acc.dram_level();
}

WeightSchedule weight_level_schedule(const StackGeometry& geom, const std::vector<TileType>& types,
                                     const Accelerator& acc) {
  WeightSchedule s;
  s.resident_level = weight_resident_level(acc, geom.stack().weight_bits(geom.graph()));
  for (const TileType& t : types) s.per_type.push_back(t.attr.opens_stack ? acc.dram_level() : s.resident_level);
  return s;
}

DataDemand build_demand(const StackGeometry& geom, const TileAttr& attr, std::uint64_t weight_bits,
                        int weight_resident_level, int weight_top_level) {
  DataDemand d;
  d.weight_bits = weight_bits;
  d.weight_resident_level = weight_resident_level;
  d.weight_top_level = weight_top_level;
  const auto& maps = geom.maps();
  for (std::size_t li = 0; li < geom.layer_count(); ++li) {
    const Layer& l = geom.layer(li);
    LayerDemand ld;
    ld.layer_id = l.id;
    for (std::size_t im : geom.input_maps(li)) {
      const MapTileData& md = attr.maps[im];
      const auto bits = static_cast<std::uint64_t>(maps[im].bits);
      ld.bits[index(DataCategory::I)] +=
          static_cast<std::uint64_t>(md.required.area() * maps[im].channels) * bits;
      if (maps[im].consumers.front() == l.id) {
        ld.bits[index(DataCategory::CachedLeft)] += md.live_left * bits;
        ld.bits[index(DataCategory::CachedRow)] += md.live_row * bits;
      }
    }
    const std::size_t om = geom.output_map(li);
    ld.bits[index(DataCategory::O)] =
        static_cast<std::uint64_t>(attr.maps[om].fresh.area() * maps[om].channels) * static_cast<std::uint64_t>(maps[om].bits);
    ld.output_to_dram = om == geom.final_map();
    d.layers.push_back(ld);
  }
  return d;
}

namespace {

Operand chain_operand(DataCategory c) { return c == DataCategory::O ? Operand::O : Operand::I; }

std::vector<int> eligible_levels(const Accelerator& acc, DataCategory c) {
  std::vector<int> out;
  for (int lv : acc.chain(chain_operand(c)))
    if (!acc.level(lv).per_pe) out.push_back(lv);
  return out;
}

bool is_cache(DataCategory c) { return c == DataCategory::CachedLeft || c == DataCategory::CachedRow; }

}  // namespace

Placement assign_top_memories(const DataDemand& demand, const Accelerator& acc, const AllocatorOptions& opts) {
  const std::size_t nl = acc.levels().size();
  const std::size_t steps = demand.layers.size();
  std::vector<std::vector<std::uint64_t>> occ(steps, std::vector<std::uint64_t>(nl, 0));
  if (demand.weight_resident_level >= 0 && !acc.level(demand.weight_resident_level).offchip)
    for (auto& o : occ) o[static_cast<std::size_t>(demand.weight_resident_level)] += demand.weight_bits;

  Placement p;
  p.weight_resident_level = demand.weight_resident_level;
  p.weight_bits = demand.weight_bits;
  p.layers.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    p.layers[k].layer_id = demand.layers[k].layer_id;
    p.layers[k].weight_level = demand.weight_top_level >= 0 ? demand.weight_top_level : acc.dram_level();
  }

  for (DataCategory cat : opts.priority) {
    const auto levels = eligible_levels(acc, cat);
    for (std::size_t k = 0; k < steps; ++k) {
      const std::uint64_t need = demand.layers[k].bits[index(cat)];
      int chosen = acc.dram_level();
      if (cat == DataCategory::O && demand.layers[k].output_to_dram) {
        p.layers[k].level[index(cat)] = chosen;
        continue;
      }
      for (int lv : levels) {
        const MemoryLevel& m = acc.level(lv);
        if (m.offchip) break;
        const auto v = static_cast<std::size_t>(lv);
        std::uint64_t peak = occ[k][v];
        if (is_cache(cat))
          for (std::size_t s = 0; s < steps; ++s) peak = std::max(peak, occ[s][v]);
        if (peak + need <= m.capacity_bits) {
          chosen = lv;
          break;
        }
      }
      p.layers[k].level[index(cat)] = chosen;
      if (acc.level(chosen).offchip || need == 0) continue;
      const auto v = static_cast<std::size_t>(chosen);
      if (is_cache(cat))
        for (std::size_t s = 0; s < steps; ++s) occ[s][v] += need;
      else
        occ[k][v] += need;
    }
  }
  return p;
}

Accelerator derive_capped_accelerator(const LayerPlacement& placement, const Accelerator& acc) {
  std::array<int, 3> caps{};
  caps[index(Operand::W)] = acc.chain_position(Operand::W, placement.weight_level);
  caps[index(Operand::I)] = acc.chain_position(Operand::I, placement.level[index(DataCategory::I)]);
  caps[index(Operand::O)] = acc.chain_position(Operand::O, placement.level[index(DataCategory::O)]);
  return acc.restrict_top_level(caps);
}

std::vector<std::string> audit_capacity(const DataDemand& demand, const Placement& placement,
                                        const Accelerator& acc) {
  std::vector<std::string> issues;
  const std::size_t nl = acc.levels().size();
  std::vector<std::uint64_t> live(nl, 0);
  if (placement.weight_resident_level >= 0)
    live[static_cast<std::size_t>(placement.weight_resident_level)] += placement.weight_bits;
  for (std::size_t k = 0; k < demand.layers.size(); ++k)
    for (DataCategory c : {DataCategory::CachedLeft, DataCategory::CachedRow})
      live[static_cast<std::size_t>(placement.layers[k].level[index(c)])] += demand.layers[k].bits[index(c)];
  for (std::size_t k = 0; k < demand.layers.size(); ++k) {
    std::vector<std::uint64_t> occ = live;
    for (DataCategory c : {DataCategory::I, DataCategory::O})
      occ[static_cast<std::size_t>(placement.layers[k].level[index(c)])] += demand.layers[k].bits[index(c)];
    for (std::size_t v = 0; v < nl; ++v) {
      const MemoryLevel& m = acc.level(static_cast<int>(v));
      if (m.offchip) continue;
      if (occ[v] > m.capacity_bits)
        issues.push_back("layer " + std::to_string(demand.layers[k].layer_id) + ": level " + m.name + " holds " +
                         std::to_string(occ[v]) + " bits > capacity " + std::to_string(m.capacity_bits));
    }
  }
  return issues;
}

}  // namespace fusecost

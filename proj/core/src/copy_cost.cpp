// SPDX-License-Identifier: Apache-2.0
#include "fusecost/copy_cost.hpp"

#include <algorithm>
#include <map>

#include "fusecost/error.hpp"

namespace fusecost {

Residency residency(const StackGeometry& geom, const Placement& placement, const Accelerator& acc) {
  const auto& maps = geom.maps();
  Residency r;
  r.fresh.assign(maps.size(), acc.dram_level());
  r.left.assign(maps.size(), acc.dram_level());
  r.row.assign(maps.size(), acc.dram_level());
  r.store_from.assign(maps.size(), acc.dram_level());
  auto layer_pos = [&](int id) {
    for (std::size_t i = 0; i < geom.layer_count(); ++i)
      if (geom.layer(i).id == id) return i;
    throw Error("layer not in stack");
  };
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const FeatureMap& fm = maps[m];
    if (!fm.consumers.empty()) {
      const auto& owner = placement.layers[layer_pos(fm.consumers.front())];
      r.left[m] = owner.level[index(DataCategory::CachedLeft)];
      r.row[m] = owner.level[index(DataCategory::CachedRow)];
      if (fm.is_source()) r.store_from[m] = owner.level[index(DataCategory::I)];
    }
    if (!fm.is_source()) {
      r.fresh[m] = placement.layers[layer_pos(fm.producer)].level[index(DataCategory::O)];
      r.store_from[m] = r.fresh[m];
    }
  }
  return r;
}

LayerCopies plan_copy_actions(const StackGeometry& geom, const TileAttr& attr, const Placement& placement,
                              const Residency& where, std::size_t layer_idx) {
  LayerCopies out;
  const auto& maps = geom.maps();
  const LayerPlacement& lp = placement.layers[layer_idx];
  const int id = geom.layer(layer_idx).id;
  const int dst = lp.level[index(DataCategory::I)];
  auto push = [](CopyBundle& b, CopyKind kind, Operand op, std::size_t m, std::uint64_t elems, int bits, int s,
                 int d) {
    if (elems == 0 || s == d) return;
    b.actions.push_back(DataCopyAction{kind, op, m, elems, static_cast<std::uint32_t>(bits), s, d});
  };
  for (std::size_t m : geom.input_maps(layer_idx)) {
    const MapTileData& md = attr.maps[m];
    const auto ch = static_cast<std::uint64_t>(maps[m].channels);
    push(out.gather, CopyKind::Fresh, Operand::I, m, static_cast<std::uint64_t>(md.fresh.area()) * ch, maps[m].bits,
         where.fresh[m], dst);
    push(out.gather, CopyKind::FromLeft, Operand::I, m, md.from_left, maps[m].bits, where.left[m], dst);
    push(out.gather, CopyKind::FromAbove, Operand::I, m, md.from_above, maps[m].bits, where.row[m], dst);
    if (maps[m].is_source() && maps[m].consumers.front() == id) {
      push(out.store, CopyKind::StoreLeft, Operand::I, m, md.to_left, maps[m].bits, where.store_from[m],
           where.left[m]);
      push(out.store, CopyKind::StoreAbove, Operand::I, m, md.to_above, maps[m].bits, where.store_from[m],
           where.row[m]);
    }
  }
  const std::size_t om = geom.output_map(layer_idx);
  const MapTileData& od = attr.maps[om];
  push(out.store, CopyKind::StoreLeft, Operand::O, om, od.to_left, maps[om].bits, where.store_from[om],
       where.left[om]);
  push(out.store, CopyKind::StoreAbove, Operand::O, om, od.to_above, maps[om].bits, where.store_from[om],
       where.row[om]);
  return out;
}

std::vector<int> route(const Accelerator& acc, int src, int dst) {
  if (src == dst) return {src};
  for (auto [a, b] : acc.direct_paths())
    if ((a == src && b == dst) || (a == dst && b == src)) return {src, dst};
  for (Operand op : {Operand::I, Operand::O, Operand::W}) {
    const int ps = acc.chain_position(op, src);
    const int pd = acc.chain_position(op, dst);
    if (ps < 0 || pd < 0) continue;
    const auto& ch = acc.chain(op);
    std::vector<int> path;
    if (ps < pd)
      for (int k = ps; k <= pd; ++k) path.push_back(ch[static_cast<std::size_t>(k)]);
    else
      for (int k = ps; k >= pd; --k) path.push_back(ch[static_cast<std::size_t>(k)]);
    return path;
  }
  throw RoutingError("no route from level '" + acc.level(src).name + "' to level '" + acc.level(dst).name + "'");
}

CopyCost price_bundle(const CopyBundle& bundle, const Accelerator& acc) {
  CopyCost cost;
  cost.access.assign(acc.levels().size(), {});
  std::map<std::pair<int, int>, double> port_cycles;
  for (const DataCopyAction& a : bundle.actions) {
    if (a.elements == 0) continue;
    const auto path = route(acc, a.src, a.dst);
    const std::uint64_t bits = a.bits();
    const auto o = index(a.operand);
    for (std::size_t h = 0; h + 1 < path.size(); ++h) {
      const MemoryLevel& from = acc.level(path[h]);
      const MemoryLevel& to = acc.level(path[h + 1]);
      const std::uint64_t rw = (bits + from.word_length_bits - 1) / from.word_length_bits;
      const std::uint64_t ww = (bits + to.word_length_bits - 1) / to.word_length_bits;
      auto& r = cost.access[static_cast<std::size_t>(path[h])][o];
      auto& w = cost.access[static_cast<std::size_t>(path[h + 1])][o];
      r.read_elements += a.elements;
      r.read_words += rw;
      w.write_elements += a.elements;
      w.write_words += ww;
      const int rp = from.read_port(), wp = to.write_port();
      port_cycles[{path[h], rp}] +=
          static_cast<double>(rw * from.word_length_bits) / from.ports[static_cast<std::size_t>(rp)].bw_bits_per_cycle;
      port_cycles[{path[h + 1], wp}] +=
          static_cast<double>(ww * to.word_length_bits) / to.ports[static_cast<std::size_t>(wp)].bw_bits_per_cycle;
    }
  }
  for (std::size_t v = 0; v < cost.access.size(); ++v) {
    const MemoryLevel& m = acc.level(static_cast<int>(v));
    for (auto& a : cost.access[v]) {
      a.energy_pJ = static_cast<double>(a.read_words) * m.read_energy_pJ +
                    static_cast<double>(a.write_words) * m.write_energy_pJ;
      cost.energy_pJ += a.energy_pJ;
    }
  }
  for (auto& [port, cycles] : port_cycles) cost.latency_cycles = std::max(cost.latency_cycles, cycles);
  return cost;
}

}  // namespace fusecost

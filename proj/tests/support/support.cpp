// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <algorithm>

#include "fusecost/error.hpp"

namespace fusecost::testing {

std::filesystem::path config_path(const std::string& kind, const std::string& name) {
  return std::filesystem::path(FUSECOST_TEST_CONFIG_DIR) / kind / (name + ".json");
}

WorkloadGraph shipped_workload(const std::string& name) { return load_workload(config_path("workloads", name)); }

Accelerator shipped_accelerator(const std::string& name) {
  return load_accelerator(config_path("accelerators", name));
}

WorkloadGraph random_chain(std::mt19937_64& rng, int max_layers, std::int64_t max_extent) {
  auto pick = [&](auto lo, auto hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  const int n = static_cast<int>(pick(1, max_layers));
  while (true) {
    std::vector<Layer> rev;
    std::int64_t w = pick(1, std::min<std::int64_t>(max_extent, 24));
    std::int64_t h = pick(1, std::min<std::int64_t>(max_extent, 24));
    std::int64_t k = pick(1, 3);
    bool ok = true;
    for (int i = n; i >= 1 && ok; --i) {
      int tries = 0;
      while (true) {
        if (++tries > 64) {
          ok = false;
          break;
        }
        const std::int64_t f = std::array<std::int64_t, 3>{1, 3, 5}[static_cast<std::size_t>(pick(0, 2))];
        const int s = static_cast<int>(pick(1, 2));
        const int p = static_cast<int>(pick(0, 2));
        const std::int64_t iw = (w - 1) * s + f - 2 * p, ih = (h - 1) * s + f - 2 * p;
        if (iw < 1 || ih < 1 || iw > max_extent || ih > max_extent) continue;
        Layer l;
        l.id = i;
        l.K = k;
        l.C = pick(1, 3);
        l.OX = w;
        l.OY = h;
        l.FX = l.FY = f;
        l.stride_x = l.stride_y = s;
        l.pad_left = l.pad_right = l.pad_top = l.pad_bottom = p;
        if (i > 1) l.predecessors = {i - 1};
        rev.push_back(l);
        w = iw;
        h = ih;
        k = l.C;
        break;
      }
    }
    if (!ok) continue;
    std::reverse(rev.begin(), rev.end());
    return WorkloadGraph("random_chain", rev);
  }
}

TinyCase random_tiny_case(std::mt19937_64& rng) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  while (true) {
    LayerInstance li;
    const auto kind_roll = pick(0, 9);
    li.kind = kind_roll < 7 ? LayerKind::Conv : kind_roll < 8 ? LayerKind::DepthwiseConv
                                              : kind_roll < 9 ? LayerKind::Pooling
                                                              : LayerKind::Add;
    for (auto& b : li.bounds) b = pick(1, 4);
    if (li.kind != LayerKind::Conv) li.bounds[index(LoopDim::C)] = 1;
    if (li.kind == LayerKind::Add) {
      li.bounds[index(LoopDim::FX)] = li.bounds[index(LoopDim::FY)] = 1;
      li.input_operands = 2;
    }
    li.stride_x = static_cast<int>(pick(1, 2));
    li.stride_y = static_cast<int>(pick(1, 2));
    li.output_bits = pick(0, 1) ? 8 : 16;

    SpatialUnrolling su;
    std::uint64_t macs = 1;
    const int nsu = static_cast<int>(pick(0, 2));
    std::vector<LoopDim> dims(kLoopDims.begin(), kLoopDims.end());
    std::shuffle(dims.begin(), dims.end(), rng);
    for (int i = 0; i < nsu; ++i) {
      const auto b = li.bounds[index(dims[static_cast<std::size_t>(i)])];
      std::vector<int> divs;
      for (int d = 2; d <= b; ++d)
        if (b % d == 0) divs.push_back(d);
      if (divs.empty()) continue;
      const int f = divs[static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(divs.size()) - 1))];
      su.factors.emplace_back(dims[static_cast<std::size_t>(i)], f);
      macs *= static_cast<std::uint64_t>(f);
    }

    auto port = [](PortDir d, double bw) { return Port{d, bw}; };
    std::vector<MemoryLevel> levels;
    const bool shared = pick(0, 1) == 1;
    const bool per_pe = pick(0, 2) == 0;
    auto make = [&](const std::string& name, std::array<bool, 3> serves) {
      MemoryLevel m;
      m.name = name;
      m.per_pe = per_pe;
      m.capacity_bits = static_cast<std::uint64_t>(per_pe ? pick(32, 512) : pick(64, 4096));
      m.word_length_bits = static_cast<std::uint32_t>(per_pe ? 8 : 8 * pick(1, 4));
      m.read_energy_pJ = 0.5 + static_cast<double>(pick(0, 8)) / 4;
      m.write_energy_pJ = m.read_energy_pJ + 0.25;
      m.ports = {port(PortDir::Read, 64.0 * static_cast<double>(pick(1, 8))),
                 port(PortDir::Write, 64.0 * static_cast<double>(pick(1, 8)))};
      m.serves = serves;
      return m;
    };
    if (shared) {
      levels.push_back(make("L0", {true, true, true}));
    } else {
      levels.push_back(make("W0", {true, false, false}));
      levels.push_back(make("I0", {false, true, false}));
      levels.push_back(make("O0", {false, false, true}));
    }
    MemoryLevel dram;
    dram.name = "DRAM";
    dram.capacity_bits = 1ULL << 40;
    dram.word_length_bits = 64;
    dram.read_energy_pJ = 100;
    dram.write_energy_pJ = 110;
    dram.ports = {port(PortDir::ReadWrite, 64)};
    dram.serves = {true, true, true};
    dram.offchip = true;
    levels.push_back(dram);
    Accelerator acc("tiny", macs, 0.5, su, levels);
    try {
      search_mapping(li, acc, 8);
    } catch (const CapacityError&) {
      continue;
    }
    return TinyCase{li, acc};
  }
}

std::map<std::vector<std::int64_t>, SignatureCount> enumerate_signatures(const StackGeometry& geom, OverlapMode mode,
                                                                         const TileGrid& grid) {
  std::map<std::vector<std::int64_t>, SignatureCount> out;
  for (std::int64_t r = 0; r < grid.rows; ++r)
    for (std::int64_t c = 0; c < grid.cols; ++c) {
      auto [it, inserted] = out.emplace(backcalc(geom, mode, grid, c, r).signature(), SignatureCount{0, c, r});
      ++it->second.count;
    }
  return out;
}

std::uint64_t layer_by_layer_macs(const WorkloadGraph& g) {
  std::uint64_t total = 0;
  for (const Layer& l : g.layers()) {
    std::uint64_t per = l.kind == LayerKind::Conv ? static_cast<std::uint64_t>(l.C * l.FX * l.FY)
                        : l.kind == LayerKind::Add ? 1
                                                   : static_cast<std::uint64_t>(l.FX * l.FY);
    total += static_cast<std::uint64_t>(l.OX * l.OY * l.K) * per;
  }
  return total;
}

}  // namespace fusecost::testing

// SPDX-License-Identifier: Apache-2.0
#include "fusecost/engine.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "fusecost/error.hpp"

namespace fusecost {

std::string_view to_string(Cause c) {
  switch (c) {
    case Cause::LayerActivation: return "layer-activation";
    case Cause::LayerWeight: return "layer-weight";
    case Cause::CopyAction: return "copy-action";
  }
  return "?";
}

std::string_view short_name(Cause c) {
  switch (c) {
    case Cause::LayerActivation: return "act";
    case Cause::LayerWeight: return "wgt";
    case Cause::CopyAction: return "copy";
  }
  return "?";
}

namespace {

void accumulate(AccessCount& dst, const AccessCount& src, std::uint64_t mult) {
  dst.read_elements += src.read_elements * mult;
  dst.write_elements += src.write_elements * mult;
  dst.read_words += src.read_words * mult;
  dst.write_words += src.write_words * mult;
  dst.energy_pJ += src.energy_pJ * static_cast<double>(mult);
}

}  // namespace

void Breakdown::add(const std::vector<std::array<AccessCount, 3>>& access, Cause cause, std::uint64_t mult) {
  for (std::size_t v = 0; v < access.size() && v < cells.size(); ++v)
    for (Operand op : kOperands) {
      Cause c = cause;
      if (cause != Cause::CopyAction) c = op == Operand::W ? Cause::LayerWeight : Cause::LayerActivation;
      accumulate(cells[v][index(op)][static_cast<std::size_t>(c)], access[v][index(op)], mult);
    }
}

void Breakdown::add(const Breakdown& o) {
  if (cells.size() < o.cells.size()) cells.resize(o.cells.size());
  for (std::size_t v = 0; v < o.cells.size(); ++v)
    for (std::size_t op = 0; op < 3; ++op)
      for (std::size_t c = 0; c < 3; ++c) accumulate(cells[v][op][c], o.cells[v][op][c], 1);
}

double Breakdown::memory_energy_pJ(double start) const {
  double e = start;
  for (const auto& lv : cells)
    for (const auto& op : lv)
      for (const auto& c : op) e += c.energy_pJ;
  return e;
}

std::uint64_t Breakdown::total_elements() const {
  std::uint64_t n = 0;
  for (const auto& lv : cells)
    for (const auto& op : lv)
      for (const auto& c : op) n += c.read_elements + c.write_elements;
  return n;
}

Engine::Engine(const WorkloadGraph& g, const Accelerator& acc, EngineOptions opts)
    : g_(g), acc_(acc), opts_(std::move(opts)) {
  if (opts_.lpf_limit < 1) throw ValidationError("lpf_limit must be >= 1");
}

std::uint64_t Engine::mapper_searches() const {
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.size();
}

std::shared_ptr<const SearchResult> Engine::mapping_for(const LayerInstance& inst,
                                                        const std::array<int, 3>& caps) const {
  std::string key = inst.key() + '|' + std::to_string(caps[0]) + ',' + std::to_string(caps[1]) + ',' +
                    std::to_string(caps[2]);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  auto capped = acc_.restrict_top_level(caps);
  auto res = std::make_shared<const SearchResult>(search_mapping(inst, capped, opts_.lpf_limit, opts_.objective));
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.emplace(std::move(key), std::move(res)).first->second;
}

StackResult Engine::evaluate_stack(const Stack& stack, std::size_t stack_index, const StackStrategy& s) const {
  StackGeometry geom(g_, stack);
  const TileGrid grid = tile_grid(geom.out_width(), geom.out_height(), s.tile_x, s.tile_y);
  const auto types = identify_tile_types(geom, s.mode, grid);
  const auto wsched = weight_level_schedule(geom, types, acc_);
  const std::uint64_t wbits = stack.weight_bits(g_);

  StackResult out;
  out.stack_index = stack_index;
  out.strategy = s;
  out.tile_count = static_cast<std::uint64_t>(grid.count());
  out.tile_type_count = types.size();
  out.weight_resident_level = wsched.resident_level;
  out.breakdown = Breakdown(acc_.levels().size());

  for (std::size_t t = 0; t < types.size(); ++t) {
    const TileType& type = types[t];
    const std::uint64_t mult = type.multiplicity;
    const DataDemand demand = build_demand(geom, type.attr, wbits, wsched.resident_level, wsched.per_type[t]);
    const Placement placement = assign_top_memories(demand, acc_, opts_.allocator);
    const Residency where = residency(geom, placement, acc_);
    TileTypeResult tr;
    tr.multiplicity = mult;
    for (std::size_t li = 0; li < geom.layer_count(); ++li) {
      const Layer& layer = geom.layer(li);
      const Region& fresh = type.attr.maps[geom.output_map(li)].fresh;
      const LayerCopies copies = plan_copy_actions(geom, type.attr, placement, where, li);
      LayerEval ev;
      ev.layer_id = layer.id;
      if (!fresh.empty()) {
        ev.computed = true;
        ev.gather = price_bundle(copies.gather, acc_);
        const LayerPlacement& lp = placement.layers[li];
        std::array<int, 3> caps{};
        caps[index(Operand::W)] = acc_.chain_position(Operand::W, lp.weight_level);
        caps[index(Operand::I)] = acc_.chain_position(Operand::I, lp.level[index(DataCategory::I)]);
        caps[index(Operand::O)] = acc_.chain_position(Operand::O, lp.level[index(DataCategory::O)]);
        ev.instance = LayerInstance::from_layer(layer, fresh.width(), fresh.height());
        auto found = mapping_for(ev.instance, caps);
        ev.mapping = found->mapping;
        ev.cost = found->cost;
        out.breakdown.add(ev.gather.access, Cause::CopyAction, mult);
        out.breakdown.add(ev.cost.access, Cause::LayerActivation, mult);
        out.macs += ev.cost.macs * mult;
        out.mac_energy_pJ += ev.cost.mac_energy_pJ * static_cast<double>(mult);
        tr.energy_pJ += ev.gather.energy_pJ + ev.cost.energy_pJ;
        tr.latency_cycles += ev.gather.latency_cycles + ev.cost.latency_cycles;
      }
      ev.store = price_bundle(copies.store, acc_);
      out.breakdown.add(ev.store.access, Cause::CopyAction, mult);
      tr.energy_pJ += ev.store.energy_pJ;
      tr.latency_cycles += ev.store.latency_cycles;
      if (opts_.keep_details) tr.layers.push_back(std::move(ev));
    }
    out.latency_cycles += tr.latency_cycles * static_cast<double>(mult);
    if (opts_.keep_details) {
      tr.attr = type.attr;
      tr.placement = placement;
      out.types.push_back(std::move(tr));
    }
  }
  out.energy_pJ = out.breakdown.memory_energy_pJ(out.mac_energy_pJ);
  return out;
}

CostResult Engine::evaluate(const DFStrategy& strategy) const {
  validate_plan(g_, strategy.plan);
  if (strategy.stacks.size() != strategy.plan.stacks.size())
    throw ValidationError("strategy needs exactly one tile/mode setting per stack");
  CostResult r;
  r.breakdown = Breakdown(acc_.levels().size());
  for (std::size_t i = 0; i < strategy.plan.stacks.size(); ++i) {
    StackResult s = evaluate_stack(strategy.plan.stacks[i], i, strategy.stacks[i]);
    r.latency_cycles += s.latency_cycles;
    r.mac_energy_pJ += s.mac_energy_pJ;
    r.macs += s.macs;
    r.tile_type_count += s.tile_type_count;
    r.breakdown.add(s.breakdown);
    r.stacks.push_back(std::move(s));
  }
  r.energy_pJ = r.breakdown.memory_energy_pJ(r.mac_energy_pJ);
  return r;
}

DFStrategy uniform_strategy(const WorkloadGraph& g, const StackPlan& plan, std::int64_t tx, std::int64_t ty,
                            OverlapMode mode) {
  if (tx < 1 || ty < 1) throw ValidationError("tile size must be >= 1");
  DFStrategy s;
  s.plan = plan;
  for (const Stack& st : plan.stacks) {
    const Layer& out = g.layer(st.output_layer);
    s.stacks.push_back(StackStrategy{std::min(tx, out.OX), std::min(ty, out.OY), mode});
  }
  return s;
}

SweepSpec default_sweep_spec() {
  return SweepSpec{{1, 4, 16, 60, 240, 960},
                   {1, 4, 18, 72, 270, 540},
                   {OverlapMode::FullyRecompute, OverlapMode::HCachedVRecompute, OverlapMode::FullyCached}};
}

std::string strategy_id(OverlapMode mode, std::int64_t tx, std::int64_t ty) {
  std::ostringstream os;
  os << 'm' << static_cast<int>(mode) << "_tx" << tx << "_ty" << ty;
  return os.str();
}

std::vector<SweepRow> sweep(const Engine& engine, const StackPlan& plan, const SweepSpec& spec, int threads,
                            const std::set<std::string>& skip) {
  if (spec.tile_x.empty() || spec.tile_y.empty() || spec.modes.empty())
    throw ValidationError("sweep grid is empty");
  std::vector<SweepRow> rows;
  for (OverlapMode m : spec.modes)
    for (auto tx : spec.tile_x)
      for (auto ty : spec.tile_y) {
        SweepRow r;
        r.strategy_id = strategy_id(m, tx, ty);
        r.tile_x = tx;
        r.tile_y = ty;
        r.mode = m;
        r.skipped = skip.count(r.strategy_id) != 0;
        rows.push_back(std::move(r));
      }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& r = rows[i];
      if (r.skipped) continue;
      try {
        r.result = engine.evaluate(uniform_strategy(engine.graph(), plan, r.tile_x, r.tile_y, r.mode));
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const int n = std::max(1, threads);
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::optional<std::size_t> best_row(const std::vector<SweepRow>& rows, const Objective& objective) {
  std::optional<std::size_t> best;
  double best_score = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].result) continue;
    double s = objective.score(rows[i].result->energy_pJ, rows[i].result->latency_cycles);
    if (!best || s < best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

DFStrategy best_combination(const Engine& engine, const StackPlan& plan,
                            const std::vector<std::vector<StackStrategy>>& candidates) {
  if (candidates.size() != plan.stacks.size())
    throw ValidationError("need one candidate list per stack");
  DFStrategy out;
  out.plan = plan;
  for (std::size_t i = 0; i < plan.stacks.size(); ++i) {
    if (candidates[i].empty()) throw ValidationError("stack " + std::to_string(i) + " has no candidate strategy");
    std::optional<std::size_t> best;
    double best_score = 0;
    for (std::size_t c = 0; c < candidates[i].size(); ++c) {
      StackResult r = engine.evaluate_stack(plan.stacks[i], i, candidates[i][c]);
      double s = engine.options().objective.score(r.energy_pJ, r.latency_cycles);
      if (!best || s < best_score) {
        best = c;
        best_score = s;
      }
    }
    out.stacks.push_back(candidates[i][*best]);
  }
  return out;
}

}  // namespace fusecost

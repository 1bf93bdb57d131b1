// SPDX-License-Identifier: Apache-2.0
#include "fusecost/stack_plan.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fusecost/error.hpp"

namespace fusecost {

bool Stack::contains(int id) const {
  return std::find(layer_ids.begin(), layer_ids.end(), id) != layer_ids.end();
}

std::vector<int> Stack::input_layers(const WorkloadGraph& g) const {
  std::vector<int> out;
  for (int id : layer_ids) {
    const Layer& l = g.layer(id);
    bool external = l.predecessors.empty();
    for (int p : l.predecessors) external = external || !contains(p);
    if (external) out.push_back(id);
  }
  return out;
}

std::uint64_t Stack::weight_bits(const WorkloadGraph& g) const {
  std::uint64_t t = 0;
  for (int id : layer_ids) t += weight_size_bits(g.layer(id));
  return t;
}

std::vector<std::size_t> branch_free_cuts(const WorkloadGraph& g) {
  const auto& layers = g.layers();
  const std::size_t n = layers.size();
  // For each cut p, the earliest source position among crossing edges must be p-1.
  std::vector<std::size_t> cuts;
  for (std::size_t p = 1; p < n; ++p) {
    bool ok = true;
    for (std::size_t v = p; v < n && ok; ++v)
      for (int pred : layers[v].predecessors)
        if (g.position(pred) < p - 1) ok = false;
    if (ok) cuts.push_back(p);
  }
  return cuts;
}

std::uint64_t stack_weight_capacity_bits(const Accelerator& acc) {
  int lv = acc.highest_onchip_weight_level();
  return lv < 0 ? 0 : acc.level(lv).capacity_bits;
}

StackPlan auto_stack(const WorkloadGraph& g, const Accelerator& acc) {
  return auto_stack(g, stack_weight_capacity_bits(acc));
}

StackPlan auto_stack(const WorkloadGraph& g, std::uint64_t cap) {
  const auto& layers = g.layers();
  std::vector<std::size_t> bounds{0};
  for (std::size_t c : branch_free_cuts(g)) bounds.push_back(c);
  bounds.push_back(layers.size());

  StackPlan plan;
  std::vector<int> current;
  std::uint64_t running = 0;
  auto close = [&] {
    if (current.empty()) return;
    plan.stacks.push_back(Stack{current, current.back()});
    current.clear();
    running = 0;
  };
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    std::vector<int> seg;
    std::uint64_t w = 0;
    for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i) {
      seg.push_back(layers[i].id);
      w += weight_size_bits(layers[i]);
    }
    if (w > cap) {
      close();
      for (int id : seg) plan.stacks.push_back(Stack{{id}, id});
      continue;
    }
    if (running + w > cap) close();
    current.insert(current.end(), seg.begin(), seg.end());
    running += w;
  }
  close();
  return plan;
}

StackPlan explicit_plan(const WorkloadGraph& g, const std::vector<std::vector<int>>& stacks) {
  StackPlan plan;
  for (const auto& ids : stacks) {
    Stack s;
    s.layer_ids = ids;
    for (int id : ids)
      if (!g.contains(id)) throw ValidationError("stack references unknown layer " + std::to_string(id));
    std::sort(s.layer_ids.begin(), s.layer_ids.end(),
              [&](int a, int b) { return g.position(a) < g.position(b); });
    if (!s.layer_ids.empty()) s.output_layer = s.layer_ids.back();
    plan.stacks.push_back(std::move(s));
  }
  validate_plan(g, plan);
  return plan;
}

StackPlan single_layer_plan(const WorkloadGraph& g) {
  StackPlan plan;
  for (const Layer& l : g.layers()) plan.stacks.push_back(Stack{{l.id}, l.id});
  return plan;
}

StackPlan whole_graph_plan(const WorkloadGraph& g) {
  Stack s;
  for (const Layer& l : g.layers()) s.layer_ids.push_back(l.id);
  s.output_layer = s.layer_ids.back();
  return StackPlan{{s}};
}

void validate_plan(const WorkloadGraph& g, const StackPlan& plan) {
  std::set<int> seen;
  std::size_t next_pos = 0;
  for (std::size_t si = 0; si < plan.stacks.size(); ++si) {
    const Stack& s = plan.stacks[si];
    const std::string where = "stack " + std::to_string(si);
    if (s.layer_ids.empty()) throw ValidationError(where + " is empty");
    for (std::size_t k = 0; k < s.layer_ids.size(); ++k) {
      int id = s.layer_ids[k];
      if (!g.contains(id)) throw ValidationError(where + " references unknown layer " + std::to_string(id));
      if (!seen.insert(id).second) throw ValidationError("layer " + std::to_string(id) + " appears in two stacks");
      if (g.position(id) != next_pos)
        throw ValidationError(where + " is not contiguous in topological order at layer " + std::to_string(id));
      ++next_pos;
    }
    if (s.output_layer != s.layer_ids.back())
      throw ValidationError(where + ": output layer must be its last layer");
    for (std::size_t k = 0; k + 1 < s.layer_ids.size(); ++k) {
      int id = s.layer_ids[k];
      for (int succ : g.successors(id))
        if (!s.contains(succ))
          throw ValidationError(where + ": layer " + std::to_string(id) + " feeds layer " + std::to_string(succ) +
                                " outside the stack but is not the stack output layer " +
                                std::to_string(s.output_layer));
    }
  }
  if (seen.size() != g.layers().size()) throw ValidationError("stack plan does not cover every layer");
}

std::string describe(const StackPlan& plan) {
  std::ostringstream os;
  for (std::size_t i = 0; i < plan.stacks.size(); ++i) {
    os << "stack " << i << ":";
    for (int id : plan.stacks[i].layer_ids) os << ' ' << id;
    os << '\n';
  }
  return os.str();
}

}  // namespace fusecost

// SPDX-License-Identifier: Apache-2.0
#include "fusecost/workload.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fusecost/error.hpp"

namespace fusecost {

using nlohmann::json;

std::optional<Operand> operand_from_string(std::string_view s) {
  if (s == "W") return Operand::W;
  if (s == "I") return Operand::I;
  if (s == "O") return Operand::O;
  return std::nullopt;
}

std::optional<LoopDim> loop_dim_from_string(std::string_view s) {
  for (LoopDim d : kLoopDims)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::DepthwiseConv: return "depthwise-conv";
    case LayerKind::Pooling: return "pooling";
    case LayerKind::Add: return "elementwise-add";
  }
  return "?";
}

std::optional<LayerKind> layer_kind_from_string(std::string_view s) {
  if (s == "conv") return LayerKind::Conv;
  if (s == "depthwise-conv" || s == "depthwise") return LayerKind::DepthwiseConv;
  if (s == "pooling" || s == "pool") return LayerKind::Pooling;
  if (s == "elementwise-add" || s == "add") return LayerKind::Add;
  return std::nullopt;
}

std::int64_t Layer::macs_per_output() const {
  switch (kind) {
    case LayerKind::Conv: return C * FX * FY;
    case LayerKind::DepthwiseConv:
    case LayerKind::Pooling: return FX * FY;
    case LayerKind::Add: return 1;
  }
  return 0;
}

std::uint64_t Layer::mac_count() const {
  return static_cast<std::uint64_t>(K * OX * OY * macs_per_output());
}

std::uint64_t Layer::weight_count() const {
  switch (kind) {
    case LayerKind::Conv: return static_cast<std::uint64_t>(K * C * FX * FY);
    case LayerKind::DepthwiseConv: return static_cast<std::uint64_t>(C * FX * FY);
    default: return 0;
  }
}

std::uint64_t weight_size_bits(const Layer& layer) {
  return layer.weight_count() * static_cast<std::uint64_t>(layer.weight_bits);
}

std::uint64_t stack_weight_size_bits(const std::vector<const Layer*>& layers) {
  std::uint64_t total = 0;
  for (const Layer* l : layers) total += weight_size_bits(*l);
  return total;
}

namespace {

[[noreturn]] void invalid(int id, const std::string& msg) {
  throw ValidationError("layer " + std::to_string(id) + ": " + msg);
}

void check_layer_local(const Layer& l) {
  const std::pair<const char*, std::int64_t> dims[] = {
      {"K", l.K}, {"C", l.C}, {"OX", l.OX}, {"OY", l.OY}, {"FX", l.FX}, {"FY", l.FY}};
  for (auto [n, v] : dims)
    if (v < 1) invalid(l.id, std::string(n) + " must be >= 1");
  if (l.stride_x < 1 || l.stride_y < 1) invalid(l.id, "strides must be >= 1");
  if (l.pad_left < 0 || l.pad_right < 0 || l.pad_top < 0 || l.pad_bottom < 0)
    invalid(l.id, "padding must be non-negative");
  if (l.act_bits < 1 || l.weight_bits < 1) invalid(l.id, "precisions must be >= 1 bit");
  if (l.input_width() < 1 || l.input_height() < 1)
    invalid(l.id, "padding exceeds the kernel footprint, input extent < 1");
  switch (l.kind) {
    case LayerKind::DepthwiseConv:
      if (l.K != l.C) invalid(l.id, "depthwise-conv requires K == C");
      break;
    case LayerKind::Pooling:
      if (l.K != l.C) invalid(l.id, "pooling requires K == C");
      break;
    case LayerKind::Add:
      if (l.FX != 1 || l.FY != 1) invalid(l.id, "elementwise-add requires FX = FY = 1");
      if (l.K != l.C) invalid(l.id, "elementwise-add requires K == C");
      if (l.stride_x != 1 || l.stride_y != 1) invalid(l.id, "elementwise-add requires stride 1");
      if (l.predecessors.size() < 2) invalid(l.id, "elementwise-add needs at least 2 predecessors");
      break;
    case LayerKind::Conv:
      break;
  }
  if (l.kind != LayerKind::Add && l.predecessors.size() > 1)
    invalid(l.id, "only elementwise-add may have more than one predecessor");
  std::set<int> seen(l.predecessors.begin(), l.predecessors.end());
  if (seen.size() != l.predecessors.size()) invalid(l.id, "duplicate predecessor");
}

}  // namespace

WorkloadGraph::WorkloadGraph(std::string name, std::vector<Layer> layers) : name_(std::move(name)) {
  if (layers.empty()) throw ValidationError("workload has no layers");
  std::unordered_map<int, std::size_t> by_id;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!by_id.emplace(layers[i].id, i).second)
      invalid(layers[i].id, "duplicate layer id");
  }
  for (const Layer& l : layers) {
    check_layer_local(l);
    for (int p : l.predecessors) {
      auto it = by_id.find(p);
      if (it == by_id.end()) invalid(l.id, "unknown predecessor " + std::to_string(p));
      if (p == l.id) invalid(l.id, "self loop");
      const Layer& pl = layers[it->second];
      if (pl.OX != l.input_width() || pl.OY != l.input_height())
        invalid(l.id, "input extent " + std::to_string(l.input_width()) + "x" +
                          std::to_string(l.input_height()) + " implied by stride/kernel/padding does not match predecessor " +
                          std::to_string(p) + " output " + std::to_string(pl.OX) + "x" + std::to_string(pl.OY));
      if (pl.K != l.C)
        invalid(l.id, "C=" + std::to_string(l.C) + " does not match predecessor " + std::to_string(p) +
                          " K=" + std::to_string(pl.K));
      if (pl.act_bits != l.act_bits && l.kind == LayerKind::Add)
        invalid(l.id, "elementwise-add inputs must share act_bits");
    }
  }

  // Kahn, smallest ready id first.
  std::unordered_map<int, int> indeg;
  std::unordered_map<int, std::vector<int>> succ;
  for (const Layer& l : layers) {
    indeg[l.id] = static_cast<int>(l.predecessors.size());
    for (int p : l.predecessors) succ[p].push_back(l.id);
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (const Layer& l : layers)
    if (indeg[l.id] == 0) ready.push(l.id);
  while (!ready.empty()) {
    int id = ready.top();
    ready.pop();
    layers_.push_back(layers[by_id[id]]);
    for (int s : succ[id])
      if (--indeg[s] == 0) ready.push(s);
  }
  if (layers_.size() != layers.size()) throw ValidationError("workload graph contains a cycle");

  int finals = 0;
  for (const Layer& l : layers_)
    if (succ[l.id].empty()) ++finals;
  if (finals != 1)
    throw ValidationError("workload must have exactly one final layer, found " + std::to_string(finals));

  succ_.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) pos_[layers_[i].id] = i;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& s = succ[layers_[i].id];
    std::sort(s.begin(), s.end());
    succ_[i] = s;
  }
}

const Layer& WorkloadGraph::layer(int id) const { return layers_[position(id)]; }

std::size_t WorkloadGraph::position(int id) const {
  auto it = pos_.find(id);
  if (it == pos_.end()) throw Error("no layer with id " + std::to_string(id));
  return it->second;
}

const std::vector<int>& WorkloadGraph::successors(int id) const { return succ_[position(id)]; }

std::vector<int> WorkloadGraph::input_layers() const {
  std::vector<int> out;
  for (const Layer& l : layers_)
    if (l.predecessors.empty()) out.push_back(l.id);
  return out;
}

std::uint64_t WorkloadGraph::total_macs() const {
  std::uint64_t t = 0;
  for (const Layer& l : layers_) t += l.mac_count();
  return t;
}

std::uint64_t WorkloadGraph::total_weight_bits() const {
  std::uint64_t t = 0;
  for (const Layer& l : layers_) t += weight_size_bits(l);
  return t;
}

namespace {

template <class T>
T get_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get_field<T>(obj, key, where);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error at byte ") + std::to_string(e.byte) + ": " + e.what(), e.byte);
  }
}

}  // namespace

WorkloadGraph parse_workload(std::string_view text) {
  json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("workload document must be an object");
  std::string name = get_or<std::string>(doc, "name", "workload", "workload");
  if (!doc.contains("layers") || !doc["layers"].is_array())
    throw ParseError("workload: missing array 'layers'");
  std::vector<Layer> layers;
  std::size_t idx = 0;
  for (const json& jl : doc["layers"]) {
    std::string where = "layers[" + std::to_string(idx++) + "]";
    if (!jl.is_object()) throw ParseError(where + ": expected object");
    Layer l;
    l.id = get_field<int>(jl, "id", where);
    where = "layer " + std::to_string(l.id);
    auto kind = layer_kind_from_string(get_field<std::string>(jl, "kind", where));
    if (!kind) throw ParseError(where + ": unknown kind");
    l.kind = *kind;
    l.K = get_field<std::int64_t>(jl, "K", where);
    l.C = get_field<std::int64_t>(jl, "C", where);
    l.OX = get_field<std::int64_t>(jl, "OX", where);
    l.OY = get_field<std::int64_t>(jl, "OY", where);
    l.FX = get_field<std::int64_t>(jl, "FX", where);
    l.FY = get_field<std::int64_t>(jl, "FY", where);
    auto stride = get_or<std::vector<int>>(jl, "stride", {1, 1}, where);
    if (stride.size() != 2) throw ParseError(where + ": 'stride' must be [sx, sy]");
    l.stride_x = stride[0];
    l.stride_y = stride[1];
    auto pad = get_or<std::vector<int>>(jl, "pad", {0, 0, 0, 0}, where);
    if (pad.size() != 4) throw ParseError(where + ": 'pad' must be [left, right, top, bottom]");
    l.pad_left = pad[0];
    l.pad_right = pad[1];
    l.pad_top = pad[2];
    l.pad_bottom = pad[3];
    l.predecessors = get_or<std::vector<int>>(jl, "predecessors", {}, where);
    l.act_bits = get_or<int>(jl, "act_bits", 8, where);
    l.weight_bits = get_or<int>(jl, "weight_bits", 8, where);
    if (get_or<int>(jl, "B", 1, where) != 1) invalid(l.id, "batch size B must be 1");
    layers.push_back(std::move(l));
  }
  return WorkloadGraph(std::move(name), std::move(layers));
}

std::string serialize_workload(const WorkloadGraph& g) {
  json doc;
  doc["name"] = g.name();
  json arr = json::array();
  for (const Layer& l : g.layers()) {
    arr.push_back({{"id", l.id},
                   {"kind", std::string(to_string(l.kind))},
                   {"K", l.K},
                   {"C", l.C},
                   {"OX", l.OX},
                   {"OY", l.OY},
                   {"FX", l.FX},
                   {"FY", l.FY},
                   {"stride", {l.stride_x, l.stride_y}},
                   {"pad", {l.pad_left, l.pad_right, l.pad_top, l.pad_bottom}},
                   {"predecessors", l.predecessors},
                   {"act_bits", l.act_bits},
                   {"weight_bits", l.weight_bits}});
  }
  doc["layers"] = std::move(arr);
  return doc.dump(2);
}

WorkloadGraph load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open workload file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_workload(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace fusecost

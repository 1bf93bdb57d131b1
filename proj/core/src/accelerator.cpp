// SPDX-License-Identifier: Apache-2.0
#include "fusecost/accelerator.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fusecost/error.hpp"

namespace fusecost {

using nlohmann::json;

int MemoryLevel::read_port() const {
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (ports[i].dir == PortDir::Read) return static_cast<int>(i);
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (ports[i].dir == PortDir::ReadWrite) return static_cast<int>(i);
  return -1;
}

int MemoryLevel::write_port() const {
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (ports[i].dir == PortDir::Write) return static_cast<int>(i);
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (ports[i].dir == PortDir::ReadWrite) return static_cast<int>(i);
  return -1;
}

int SpatialUnrolling::factor(LoopDim d) const {
  int f = 1;
  for (auto& [dim, v] : factors)
    if (dim == d) f *= v;
  return f;
}

std::uint64_t SpatialUnrolling::product() const {
  std::uint64_t p = 1;
  for (auto& fv : factors) p *= static_cast<std::uint64_t>(fv.second);
  return p;
}

Accelerator::Accelerator(std::string name, std::uint64_t mac_count, double unit_mac_energy_pJ,
                         SpatialUnrolling su, std::vector<MemoryLevel> levels,
                         std::vector<std::pair<int, int>> direct_paths)
    : name_(std::move(name)),
      mac_count_(mac_count),
      unit_mac_energy_pJ_(unit_mac_energy_pJ),
      spatial_(std::move(su)),
      levels_(std::move(levels)),
      direct_paths_(std::move(direct_paths)) {
  auto fail = [&](const std::string& m) { throw ValidationError("accelerator " + name_ + ": " + m); };
  if (mac_count_ == 0) fail("mac_count must be positive");
  if (unit_mac_energy_pJ_ < 0) fail("unit_mac_energy_pJ must be non-negative");
  for (auto& [d, f] : spatial_.factors)
    if (f < 1) fail("spatial unrolling factor for " + std::string(to_string(d)) + " must be >= 1");
  if (spatial_.product() > mac_count_) fail("spatial unrolling product exceeds mac_count");
  if (levels_.empty()) fail("no memory levels");

  std::set<std::string> names;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const MemoryLevel& l = levels_[i];
    const std::string where = "level '" + l.name + "'";
    if (!names.insert(l.name).second) fail(where + " is declared twice");
    if (l.capacity_bits == 0) fail(where + ": capacity must be positive");
    if (l.word_length_bits == 0) fail(where + ": word length must be positive");
    if (l.read_energy_pJ < 0 || l.write_energy_pJ < 0) fail(where + ": negative access energy");
    if (l.ports.empty()) fail(where + ": no ports");
    for (const Port& p : l.ports)
      if (!(p.bw_bits_per_cycle > 0)) fail(where + ": port bandwidth must be positive");
    if (l.read_port() < 0 || l.write_port() < 0) fail(where + ": needs a readable and a writable port");
    if (!l.serves[0] && !l.serves[1] && !l.serves[2]) fail(where + ": serves no operand");
    if (l.offchip) {
      if (dram_ >= 0) fail("more than one off-chip level");
      dram_ = static_cast<int>(i);
      if (l.per_pe) fail(where + ": off-chip level cannot be per-PE");
    }
  }
  if (dram_ < 0) fail("no off-chip (DRAM) level");
  for (Operand op : kOperands) {
    auto& ch = chains_[index(op)];
    for (std::size_t i = 0; i < levels_.size(); ++i)
      if (levels_[i].serves_operand(op)) ch.push_back(static_cast<int>(i));
    if (ch.empty()) fail("operand " + std::string(to_string(op)) + " has no memory level");
    if (ch.back() != dram_)
      fail("operand " + std::string(to_string(op)) + " chain does not end at the off-chip level");
    for (std::size_t k = 1; k < ch.size(); ++k)
      if (levels_[static_cast<std::size_t>(ch[k])].per_pe)
        fail("per-PE level '" + levels_[static_cast<std::size_t>(ch[k])].name + "' must be the lowest level of " +
             std::string(to_string(op)));
  }
  for (auto [a, b] : direct_paths_) {
    if (a < 0 || b < 0 || a >= static_cast<int>(levels_.size()) || b >= static_cast<int>(levels_.size()) || a == b)
      fail("invalid direct path");
  }
}

int Accelerator::level_index(std::string_view name) const {
  for (std::size_t i = 0; i < levels_.size(); ++i)
    if (levels_[i].name == name) return static_cast<int>(i);
  return -1;
}

int Accelerator::chain_position(Operand op, int level) const {
  const auto& ch = chain(op);
  for (std::size_t i = 0; i < ch.size(); ++i)
    if (ch[i] == level) return static_cast<int>(i);
  return -1;
}

Accelerator Accelerator::restrict_top_level(const std::array<int, 3>& caps) const {
  Accelerator out = *this;
  for (Operand op : kOperands) {
    int cap = caps[index(op)];
    auto& ch = out.chains_[index(op)];
    if (cap < 0) throw ValidationError("top-level cap for " + std::string(to_string(op)) + " is below the lowest level");
    if (cap >= static_cast<int>(ch.size()))
      throw ValidationError("top-level cap for " + std::string(to_string(op)) + " is above the chain");
    ch.resize(static_cast<std::size_t>(cap) + 1);
  }
  return out;
}

std::array<int, 3> Accelerator::full_caps() const {
  std::array<int, 3> caps{};
  for (Operand op : kOperands) caps[index(op)] = static_cast<int>(chain(op).size()) - 1;
  return caps;
}

std::uint64_t Accelerator::onchip_capacity_bits() const {
  std::uint64_t total = 0;
  for (const MemoryLevel& l : levels_) {
    if (l.offchip) continue;
    total += l.per_pe ? l.capacity_bits * mac_count_ : l.capacity_bits;
  }
  return total;
}

int Accelerator::highest_onchip_weight_level() const {
  int best = -1;
  for (int lv : chain(Operand::W))
    if (!levels_[static_cast<std::size_t>(lv)].offchip) best = lv;
  return best;
}

std::vector<MemoryLevel> operand_chain(const Accelerator& acc, Operand op) {
  std::vector<MemoryLevel> out;
  for (int lv : acc.chain(op)) out.push_back(acc.level(lv));
  return out;
}

namespace {

const char* dir_name(PortDir d) {
  switch (d) {
    case PortDir::Read: return "r";
    case PortDir::Write: return "w";
    case PortDir::ReadWrite: return "rw";
  }
  return "rw";
}

PortDir parse_dir(const std::string& s, const std::string& where) {
  if (s == "r" || s == "read") return PortDir::Read;
  if (s == "w" || s == "write") return PortDir::Write;
  if (s == "rw" || s == "read-write") return PortDir::ReadWrite;
  throw ParseError(where + ": unknown port direction '" + s + "'");
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

}  // namespace

Accelerator parse_accelerator(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error at byte ") + std::to_string(e.byte) + ": " + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ParseError("accelerator document must be an object");
  const std::string name = field<std::string>(doc, "name", "accelerator");
  const std::string top = "accelerator " + name;
  auto mac_count = field<std::uint64_t>(doc, "mac_count", top);
  auto unit = field<double>(doc, "unit_mac_energy_pJ", top);

  SpatialUnrolling su;
  if (doc.contains("spatial_unrolling")) {
    for (const json& e : doc["spatial_unrolling"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number_integer())
        throw ParseError(top + ": spatial_unrolling entries must be [dim, factor]");
      auto d = loop_dim_from_string(e[0].get<std::string>());
      if (!d) throw ParseError(top + ": unknown loop dimension '" + e[0].get<std::string>() + "'");
      su.factors.emplace_back(*d, e[1].get<int>());
    }
  }

  if (!doc.contains("memory_levels") || !doc["memory_levels"].is_array())
    throw ParseError(top + ": missing array 'memory_levels'");
  std::vector<MemoryLevel> levels;
  for (const json& jl : doc["memory_levels"]) {
    MemoryLevel l;
    l.name = field<std::string>(jl, "name", top + " level");
    const std::string where = top + " level '" + l.name + "'";
    l.capacity_bits = field<std::uint64_t>(jl, "capacity_bits", where);
    l.word_length_bits = field<std::uint32_t>(jl, "word_length_bits", where);
    l.read_energy_pJ = field<double>(jl, "read_energy_pJ", where);
    l.write_energy_pJ = field<double>(jl, "write_energy_pJ", where);
    if (!jl.contains("ports") || !jl["ports"].is_array()) throw ParseError(where + ": missing array 'ports'");
    for (const json& jp : jl["ports"]) {
      Port p;
      p.dir = parse_dir(field<std::string>(jp, "dir", where), where);
      p.bw_bits_per_cycle = field<double>(jp, "bw_bits_per_cycle", where);
      l.ports.push_back(p);
    }
    for (const auto& s : field<std::vector<std::string>>(jl, "serves", where)) {
      auto op = operand_from_string(s);
      if (!op) throw ParseError(where + ": unknown operand '" + s + "'");
      l.serves[index(*op)] = true;
    }
    l.offchip = field_or<bool>(jl, "offchip", false, where);
    l.per_pe = field_or<bool>(jl, "per_pe", false, where);
    l.note = field_or<std::string>(jl, "reconstructed", "", where);
    levels.push_back(std::move(l));
  }

  std::vector<std::pair<int, int>> paths;
  if (doc.contains("direct_paths")) {
    for (const json& jp : doc["direct_paths"]) {
      if (!jp.is_array() || jp.size() != 2) throw ParseError(top + ": direct_paths entries must be [from, to]");
      int a = -1, b = -1;
      for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].name == jp[0].get<std::string>()) a = static_cast<int>(i);
        if (levels[i].name == jp[1].get<std::string>()) b = static_cast<int>(i);
      }
      if (a < 0 || b < 0) throw ValidationError(top + ": direct path names an unknown level");
      paths.emplace_back(a, b);
    }
  }
  return Accelerator(name, mac_count, unit, std::move(su), std::move(levels), std::move(paths));
}

std::string serialize_accelerator(const Accelerator& acc) {
  json doc;
  doc["name"] = acc.name();
  doc["mac_count"] = acc.mac_count();
  doc["unit_mac_energy_pJ"] = acc.unit_mac_energy_pJ();
  json su = json::array();
  for (auto& [d, f] : acc.spatial().factors) su.push_back({std::string(to_string(d)), f});
  doc["spatial_unrolling"] = su;
  json levels = json::array();
  for (const MemoryLevel& l : acc.levels()) {
    json jl;
    jl["name"] = l.name;
    jl["capacity_bits"] = l.capacity_bits;
    jl["word_length_bits"] = l.word_length_bits;
    jl["read_energy_pJ"] = l.read_energy_pJ;
    jl["write_energy_pJ"] = l.write_energy_pJ;
    json ports = json::array();
    for (const Port& p : l.ports) ports.push_back({{"dir", dir_name(p.dir)}, {"bw_bits_per_cycle", p.bw_bits_per_cycle}});
    jl["ports"] = ports;
    json serves = json::array();
    for (Operand op : kOperands)
      if (l.serves_operand(op)) serves.push_back(std::string(to_string(op)));
    jl["serves"] = serves;
    jl["offchip"] = l.offchip;
    if (l.per_pe) jl["per_pe"] = true;
    if (!l.note.empty()) jl["reconstructed"] = l.note;
    levels.push_back(jl);
  }
  doc["memory_levels"] = levels;
  if (!acc.direct_paths().empty()) {
    json paths = json::array();
    for (auto [a, b] : acc.direct_paths()) paths.push_back({acc.level(a).name, acc.level(b).name});
    doc["direct_paths"] = paths;
  }
  return doc.dump(2);
}

Accelerator load_accelerator(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open accelerator file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_accelerator(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace fusecost

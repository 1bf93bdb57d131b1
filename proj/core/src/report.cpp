// SPDX-License-Identifier: Apache-2.0
#include "fusecost/report.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "fusecost/error.hpp"

namespace fusecost {

namespace {

constexpr std::array<Cause, 3> kCauses{Cause::LayerActivation, Cause::LayerWeight, Cause::CopyAction};
constexpr std::size_t kLeading = 12;

std::string u64(std::uint64_t v) { return std::to_string(v); }

void append_cells(std::vector<std::string>& f, const Breakdown& b, std::size_t levels) {
  for (const char* kind : {"rd", "wr", "en"}) {
    for (std::size_t v = 0; v < levels; ++v)
      for (Operand op : kOperands)
        for (Cause c : kCauses) {
          const AccessCount& a = b.at(static_cast<int>(v), op, c);
          if (kind[0] == 'r')
            f.push_back(u64(a.read_elements));
          else if (kind[0] == 'w')
            f.push_back(u64(a.write_elements));
          else
            f.push_back(format_double(a.energy_pJ));
        }
  }
}

std::vector<std::string> leading(const SweepRow& row, const std::string& stack, std::uint64_t types,
                                 std::uint64_t macs, double energy, double latency, double mac_energy,
                                 std::uint64_t accesses) {
  return {kSweepSchema,
          row.strategy_id,
          stack,
          std::to_string(row.tile_x),
          std::to_string(row.tile_y),
          std::to_string(static_cast<int>(row.mode)),
          u64(types),
          u64(macs),
          format_double(energy),
          format_double(latency),
          format_double(mac_energy),
          u64(accesses)};
}

nlohmann::json access_json(const AccessCount& a) {
  return {{"read_elements", a.read_elements},
          {"write_elements", a.write_elements},
          {"read_words", a.read_words},
          {"write_words", a.write_words},
          {"energy_pJ", a.energy_pJ}};
}

nlohmann::json region_json(const Region& r) {
  if (r.empty()) return nullptr;
  return {r.x0, r.y0, r.x1, r.y1};
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> sweep_csv_header(const Accelerator& acc) {
  std::vector<std::string> h{"schema",         "strategy_id",    "stack_id",      "tx",
                             "ty",             "mode",           "tile_type_count", "mac_count",
                             "energy_total_pJ", "latency_cycles", "mac_energy_pJ", "accesses_total"};
  for (const char* kind : {"rd", "wr", "en"})
    for (const MemoryLevel& m : acc.levels())
      for (Operand op : kOperands)
        for (Cause c : kCauses)
          h.push_back(std::string(kind) + '_' + m.name + '_' + std::string(to_string(op)) + '_' +
                      std::string(short_name(c)));
  h.push_back("error");
  return h;
}

std::vector<std::vector<std::string>> sweep_csv_rows(const SweepRow& row, const Accelerator& acc,
                                                     const CsvOptions& opts) {
  const std::size_t levels = acc.levels().size();
  const std::size_t width = kLeading + levels * 27 + 1;
  std::vector<std::vector<std::string>> out;
  if (!row.result) {
    std::vector<std::string> f{kSweepSchema,
                               row.strategy_id,
                               "all",
                               std::to_string(row.tile_x),
                               std::to_string(row.tile_y),
                               std::to_string(static_cast<int>(row.mode))};
    f.resize(width - 1);
    f.push_back(row.error.empty() ? "not evaluated" : row.error);
    out.push_back(std::move(f));
    return out;
  }
  const CostResult& r = *row.result;
  auto f = leading(row, "all", r.tile_type_count, r.macs, r.energy_pJ, r.latency_cycles, r.mac_energy_pJ,
                   r.breakdown.total_elements());
  append_cells(f, r.breakdown, levels);
  f.emplace_back();
  out.push_back(std::move(f));
  if (opts.per_stack) {
    for (const StackResult& s : r.stacks) {
      auto g = leading(row, std::to_string(s.stack_index), s.tile_type_count, s.macs, s.energy_pJ,
                       s.latency_cycles, s.mac_energy_pJ, s.breakdown.total_elements());
      append_cells(g, s.breakdown, levels);
      g.emplace_back();
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    const std::string& s = fields[i];
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
      line += s;
      continue;
    }
    line += '"';
    for (char ch : s) {
      if (ch == '"') line += '"';
      line += (ch == '\n' || ch == '\r') ? ' ' : ch;
    }
    line += '"';
  }
  return line;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", line.size());
  out.push_back(std::move(cur));
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ParseError("CSV has no column '" + name + "'", 0);
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t offset = 0;
  bool first = true;
  while (std::getline(in, line)) {
    offset += line.size() + 1;
    if (line.empty()) continue;
    auto f = parse_csv_line(line);
    if (first) {
      t.header = std::move(f);
      first = false;
      continue;
    }
    if (f.size() != t.header.size())
      throw ParseError("CSV row has " + std::to_string(f.size()) + " fields, header has " +
                           std::to_string(t.header.size()),
                       offset);
    t.rows.push_back(std::move(f));
  }
  if (first) throw ParseError("CSV is empty", 0);
  return t;
}

std::map<std::string, std::vector<std::string>> completed_rows(std::istream& in,
                                                               const std::vector<std::string>& expected_header) {
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (parse_csv_line(line) != expected_header)
    throw ParseError("existing CSV header does not match " + std::string(kSweepSchema) + " for this accelerator", 0);
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = parse_csv_line(line);
    if (f.size() != expected_header.size()) throw ParseError("truncated CSV row", offset);
    offset += line.size() + 1;
    out[f[1]].push_back(line);
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const Accelerator& acc,
                     const std::map<std::string, std::vector<std::string>>& previous, const CsvOptions& opts) {
  out << csv_line(sweep_csv_header(acc)) << '\n';
  for (const SweepRow& r : rows) {
    if (r.skipped) {
      auto it = previous.find(r.strategy_id);
      if (it != previous.end()) {
        for (const auto& l : it->second) out << l << '\n';
        continue;
      }
    }
    for (const auto& f : sweep_csv_rows(r, acc, opts)) out << csv_line(f) << '\n';
  }
}

nlohmann::json to_json(const Breakdown& b, const Accelerator& acc) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t v = 0; v < b.cells.size(); ++v)
    for (Operand op : kOperands)
      for (Cause c : kCauses) {
        const AccessCount& a = b.at(static_cast<int>(v), op, c);
        if (a.read_elements == 0 && a.write_elements == 0 && a.energy_pJ == 0) continue;
        auto j = access_json(a);
        j["level"] = acc.level(static_cast<int>(v)).name;
        j["operand"] = std::string(to_string(op));
        j["cause"] = std::string(to_string(c));
        out.push_back(std::move(j));
      }
  return out;
}

nlohmann::json to_json(const CostResult& r, const Accelerator& acc) {
  nlohmann::json j;
  j["energy_pJ"] = r.energy_pJ;
  j["latency_cycles"] = r.latency_cycles;
  j["mac_energy_pJ"] = r.mac_energy_pJ;
  j["mac_count"] = r.macs;
  j["tile_type_count"] = r.tile_type_count;
  j["breakdown"] = to_json(r.breakdown, acc);
  j["stacks"] = nlohmann::json::array();
  for (const StackResult& s : r.stacks) {
    nlohmann::json sj;
    sj["stack_index"] = s.stack_index;
    sj["tile_x"] = s.strategy.tile_x;
    sj["tile_y"] = s.strategy.tile_y;
    sj["mode"] = static_cast<int>(s.strategy.mode);
    sj["tile_count"] = s.tile_count;
    sj["tile_type_count"] = s.tile_type_count;
    sj["mac_count"] = s.macs;
    sj["energy_pJ"] = s.energy_pJ;
    sj["latency_cycles"] = s.latency_cycles;
    sj["mac_energy_pJ"] = s.mac_energy_pJ;
    sj["weight_resident_level"] =
        s.weight_resident_level < 0 ? nlohmann::json(nullptr) : nlohmann::json(acc.level(s.weight_resident_level).name);
    sj["breakdown"] = to_json(s.breakdown, acc);
    nlohmann::json types = nlohmann::json::array();
    for (const TileTypeResult& t : s.types) {
      nlohmann::json tj;
      tj["col"] = t.attr.col;
      tj["row"] = t.attr.row;
      tj["multiplicity"] = t.multiplicity;
      tj["energy_pJ"] = t.energy_pJ;
      tj["latency_cycles"] = t.latency_cycles;
      nlohmann::json place = nlohmann::json::array();
      for (const LayerPlacement& lp : t.placement.layers) {
        nlohmann::json pj{{"layer", lp.layer_id}};
        for (DataCategory c : {DataCategory::I, DataCategory::O, DataCategory::CachedLeft, DataCategory::CachedRow}) {
          int lvl = lp.level[index(c)];
          pj[std::string(to_string(c))] = lvl < 0 ? nlohmann::json(nullptr) : nlohmann::json(acc.level(lvl).name);
        }
        pj["W"] = lp.weight_level < 0 ? nlohmann::json(nullptr) : nlohmann::json(acc.level(lp.weight_level).name);
        place.push_back(std::move(pj));
      }
      tj["placement"] = std::move(place);
      nlohmann::json layers = nlohmann::json::array();
      for (const LayerEval& e : t.layers) {
        nlohmann::json lj{{"layer", e.layer_id}, {"computed", e.computed}};
        if (e.computed) {
          nlohmann::json loops = nlohmann::json::array();
          for (const Loop& l : e.mapping.loops) loops.push_back({std::string(to_string(l.dim)), l.factor});
          lj["loops"] = std::move(loops);
          lj["cuts"] = {{"W", e.mapping.cuts[0]}, {"I", e.mapping.cuts[1]}, {"O", e.mapping.cuts[2]}};
          lj["energy_pJ"] = e.cost.energy_pJ;
          lj["latency_cycles"] = e.cost.latency_cycles;
          lj["spatial_utilization"] = e.cost.spatial_utilization;
          lj["macs"] = e.cost.macs;
          lj["gather_energy_pJ"] = e.gather.energy_pJ;
        }
        lj["store_energy_pJ"] = e.store.energy_pJ;
        layers.push_back(std::move(lj));
      }
      tj["layers"] = std::move(layers);
      types.push_back(std::move(tj));
    }
    sj["tile_types"] = std::move(types);
    j["stacks"].push_back(std::move(sj));
  }
  return j;
}

nlohmann::json tile_types_json(const StackGeometry& geom, const std::vector<TileType>& types) {
  nlohmann::json out = nlohmann::json::array();
  for (const TileType& t : types) {
    nlohmann::json tj{{"col", t.attr.col},
                      {"row", t.attr.row},
                      {"multiplicity", t.multiplicity},
                      {"opens_stack", t.attr.opens_stack},
                      {"first_col", t.attr.first_col},
                      {"last_col", t.attr.last_col},
                      {"first_row", t.attr.first_row},
                      {"last_row", t.attr.last_row},
                      {"macs", tile_macs(geom, t.attr)}};
    nlohmann::json maps = nlohmann::json::array();
    for (std::size_t m = 0; m < geom.maps().size(); ++m) {
      const MapTileData& d = t.attr.maps[m];
      maps.push_back({{"map", geom.maps()[m].id},
                      {"required", region_json(d.required)},
                      {"fresh", region_json(d.fresh)},
                      {"from_left", d.from_left},
                      {"from_above", d.from_above},
                      {"to_left", d.to_left},
                      {"to_above", d.to_above},
                      {"live_left", d.live_left},
                      {"live_row", d.live_row}});
    }
    tj["maps"] = std::move(maps);
    out.push_back(std::move(tj));
  }
  return out;
}

}  // namespace fusecost

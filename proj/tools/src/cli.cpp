// SPDX-License-Identifier: Apache-2.0
#include "fusecost_cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fusecost/engine.hpp"
#include "fusecost/error.hpp"
#include "fusecost/report.hpp"

namespace fusecost::cli {

namespace fs = std::filesystem;

namespace {

fs::path config_dir() {
  if (const char* env = std::getenv("FUSECOST_CONFIG_DIR"); env && *env) return env;
#ifdef FUSECOST_DEFAULT_CONFIG_DIR
  return FUSECOST_DEFAULT_CONFIG_DIR;
#else
  return "configs";
#endif
}

struct Common {
  std::string accelerator, workload, stacks = "auto", target = "energy";
  int lpf_limit = 8;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--accelerator", c.accelerator, "accelerator JSON path or bundled name");
  sub->add_option("--workload", c.workload, "workload JSON path or bundled name");
  sub->add_option("--stacks", c.stacks,
                  "fuse depth: auto | whole | single | explicit ids, e.g. 1,2,3;4,5")
      ->capture_default_str();
  sub->add_option("--target", c.target, "energy | latency | edp")->capture_default_str();
  sub->add_option("--lpf-limit", c.lpf_limit, "max temporal loop prime factors per mapping")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

StackPlan make_plan(const WorkloadGraph& g, const Accelerator& acc, const std::string& spec) {
  if (spec == "auto") return auto_stack(g, acc);
  if (spec == "whole") return whole_graph_plan(g);
  if (spec == "single") return single_layer_plan(g);
  std::vector<std::vector<int>> groups;
  std::stringstream ss(spec);
  std::string group;
  while (std::getline(ss, group, ';')) {
    std::vector<int> ids;
    std::stringstream gs(group);
    std::string id;
    while (std::getline(gs, id, ',')) {
      try {
        ids.push_back(std::stoi(id));
      } catch (const std::exception&) {
        throw ValidationError("bad layer id '" + id + "' in --stacks");
      }
    }
    groups.push_back(std::move(ids));
  }
  return explicit_plan(g, groups);
}

Objective make_objective(const std::string& name) {
  auto t = target_from_string(name);
  if (!t) throw ValidationError("unknown target '" + name + "'");
  Objective o;
  o.target = *t;
  return o;
}

struct Loaded {
  WorkloadGraph graph;
  Accelerator acc;
};

Loaded load(const Common& c) {
  if (c.accelerator.empty()) throw ValidationError("--accelerator is required");
  if (c.workload.empty()) throw ValidationError("--workload is required");
  auto ap = resolve_config(c.accelerator, "accelerators");
  auto wp = resolve_config(c.workload, "workloads");
  return Loaded{load_workload(wp), load_accelerator(ap)};
}

int evaluate_cmd(const Common& c, int mode, std::int64_t tx, std::int64_t ty, const std::string& json_out,
                 const std::string& csv_out, const std::string& tiles_out, std::ostream& out) {
  OverlapMode m = overlap_mode_from_int(mode);
  if (tx < 1 || ty < 1) throw ValidationError("--tilex and --tiley must be >= 1");
  Loaded l = load(c);
  EngineOptions opts;
  opts.lpf_limit = c.lpf_limit;
  opts.objective = make_objective(c.target);
  opts.keep_details = !json_out.empty();
  Engine engine(l.graph, l.acc, opts);
  StackPlan plan = make_plan(l.graph, l.acc, c.stacks);
  SweepRow row;
  row.tile_x = tx;
  row.tile_y = ty;
  row.mode = m;
  row.strategy_id = strategy_id(m, tx, ty);
  row.result = engine.evaluate(uniform_strategy(l.graph, plan, tx, ty, m));
  const CostResult& r = *row.result;
  out << row.strategy_id << ": energy " << format_double(r.energy_pJ) << " pJ, latency "
      << format_double(r.latency_cycles) << " cycles, MACs " << r.macs << ", tile types " << r.tile_type_count
      << '\n';
  if (!json_out.empty()) {
    std::ofstream f(json_out);
    if (!f) throw Error("cannot write " + json_out);
    f << to_json(r, l.acc).dump(2) << '\n';
  }
  if (!csv_out.empty()) {
    std::ofstream f(csv_out);
    if (!f) throw Error("cannot write " + csv_out);
    write_sweep_csv(f, {row}, l.acc);
  }
  if (!tiles_out.empty()) {
    nlohmann::json j = nlohmann::json::array();
    const DFStrategy uniform = uniform_strategy(l.graph, plan, tx, ty, m);
    for (std::size_t i = 0; i < plan.stacks.size(); ++i) {
      const StackStrategy& s = uniform.stacks[i];
      StackGeometry geom(l.graph, plan.stacks[i]);
      auto types = identify_tile_types(geom, m, tile_grid(geom.out_width(), geom.out_height(), s.tile_x, s.tile_y));
      j.push_back({{"stack", i}, {"tile_types", tile_types_json(geom, types)}});
    }
    std::ofstream f(tiles_out);
    if (!f) throw Error("cannot write " + tiles_out);
    f << j.dump(2) << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::vector<std::int64_t> grid_x, grid_y;
  std::vector<int> modes;
  int threads = 1;
  std::string output, experiment;
  bool per_stack = false;
};

void apply_experiment(const std::string& path, Common& c, SweepArgs& s, const CLI::App& sub) {
  std::ifstream f(resolve_config(path, "experiments"));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
  auto fill = [&](const char* key, const char* flag, auto& dst) {
    if (j.contains(key) && sub.count(flag) == 0) j.at(key).get_to(dst);
  };
  fill("accelerator", "--accelerator", c.accelerator);
  fill("workload", "--workload", c.workload);
  fill("stacks", "--stacks", c.stacks);
  fill("target", "--target", c.target);
  fill("lpf_limit", "--lpf-limit", c.lpf_limit);
  fill("grid_x", "--grid-x", s.grid_x);
  fill("grid_y", "--grid-y", s.grid_y);
  fill("modes", "--modes", s.modes);
}

int sweep_cmd(const Common& c, const SweepArgs& a, std::ostream& out, std::ostream& err) {
  if (a.output.empty()) throw ValidationError("--output is required");
  Loaded l = load(c);
  EngineOptions opts;
  opts.lpf_limit = c.lpf_limit;
  opts.objective = make_objective(c.target);
  Engine engine(l.graph, l.acc, opts);
  StackPlan plan = make_plan(l.graph, l.acc, c.stacks);
  SweepSpec spec = default_sweep_spec();
  if (!a.grid_x.empty()) spec.tile_x = a.grid_x;
  if (!a.grid_y.empty()) spec.tile_y = a.grid_y;
  if (!a.modes.empty()) {
    spec.modes.clear();
    for (int m : a.modes) spec.modes.push_back(overlap_mode_from_int(m));
  }
  for (auto v : spec.tile_x)
    if (v < 1) throw ValidationError("grid tile sizes must be >= 1");
  for (auto v : spec.tile_y)
    if (v < 1) throw ValidationError("grid tile sizes must be >= 1");

  const auto header = sweep_csv_header(l.acc);
  std::map<std::string, std::vector<std::string>> previous;
  if (fs::exists(a.output)) {
    std::ifstream f(a.output);
    previous = completed_rows(f, header);
  }
  std::set<std::string> skip;
  for (const auto& [id, lines] : previous) skip.insert(id);

  auto rows = sweep(engine, plan, spec, a.threads, skip);
  bool ok = true;
  std::size_t computed = 0;
  for (const SweepRow& r : rows) {
    if (r.skipped) {
      auto it = previous.find(r.strategy_id);
      for (const auto& line : it->second)
        if (parse_csv_line(line).back() != "") ok = false;
      continue;
    }
    ++computed;
    if (!r.error.empty()) {
      ok = false;
      err << r.strategy_id << ": " << r.error << '\n';
    }
  }
  const fs::path tmp = a.output + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw Error("cannot write " + tmp.string());
    write_sweep_csv(f, rows, l.acc, previous, CsvOptions{a.per_stack});
  }
  fs::rename(tmp, a.output);
  out << rows.size() << " rows (" << computed << " evaluated, " << rows.size() - computed << " resumed) -> "
      << a.output << '\n';
  if (auto b = best_row(rows, opts.objective))
    out << "best " << rows[*b].strategy_id << ": energy " << format_double(rows[*b].result->energy_pJ)
        << " pJ, latency " << format_double(rows[*b].result->latency_cycles) << " cycles\n";
  return ok ? 0 : 1;
}

}  // namespace

fs::path resolve_config(const std::string& name_or_path, const std::string& kind) {
  fs::path p(name_or_path);
  if (fs::exists(p)) return p;
  fs::path candidate = config_dir() / kind / name_or_path;
  if (candidate.extension() != ".json") candidate += ".json";
  if (fs::exists(candidate)) return candidate;
  throw Error("no such file: " + name_or_path + " (also tried " + candidate.string() + ")");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth-first schedule cost model for DNN accelerators"};
  app.require_subcommand(1);

  Common ev_common;
  int dfmode = 2;
  std::int64_t tilex = 0, tiley = 0;
  std::string json_out, csv_out, tiles_out;
  auto* ev = app.add_subcommand("evaluate", "cost of one depth-first strategy");
  add_common(ev, ev_common);
  ev->add_option("--dfmode", dfmode, "0 fully-recompute, 1 h-cached v-recompute, 2 fully-cached")
      ->capture_default_str();
  ev->add_option("--tilex", tilex, "tile width on the stack output")->required();
  ev->add_option("--tiley", tiley, "tile height on the stack output")->required();
  ev->add_option("--output", json_out, "write the detailed result as JSON");
  ev->add_option("--csv", csv_out, "write the result row as CSV");
  ev->add_option("--dump-tiles", tiles_out, "write tile type attributes as JSON");

  Common sw_common;
  SweepArgs sw_args;
  auto* sw = app.add_subcommand("sweep", "evaluate a (Tx, Ty) x mode grid into a CSV");
  add_common(sw, sw_common);
  sw->add_option("--grid-x", sw_args.grid_x, "tile widths")->delimiter(',');
  sw->add_option("--grid-y", sw_args.grid_y, "tile heights")->delimiter(',');
  sw->add_option("--modes", sw_args.modes, "overlap modes (0,1,2)")->delimiter(',');
  sw->add_option("--threads", sw_args.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--output", sw_args.output, "result CSV; rows already present are kept");
  sw->add_option("--experiment", sw_args.experiment, "experiment JSON supplying defaults for the flags");
  sw->add_flag("--per-stack", sw_args.per_stack, "add one row per stack");

  Common as_common;
  auto* as = app.add_subcommand("autostack", "print the automatic fuse-depth plan");
  as->add_option("--accelerator", as_common.accelerator)->required();
  as->add_option("--workload", as_common.workload)->required();

  std::string v_acc, v_wl, v_stacks;
  auto* va = app.add_subcommand("validate", "lint accelerator and workload files");
  va->add_option("--accelerator", v_acc);
  va->add_option("--workload", v_wl);
  va->add_option("--stacks", v_stacks, "also check a stack plan against the pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*ev) return evaluate_cmd(ev_common, dfmode, tilex, tiley, json_out, csv_out, tiles_out, out);
    if (*sw) {
      if (!sw_args.experiment.empty()) apply_experiment(sw_args.experiment, sw_common, sw_args, *sw);
      return sweep_cmd(sw_common, sw_args, out, err);
    }
    if (*as) {
      Loaded l = load(as_common);
      out << describe(auto_stack(l.graph, l.acc)) << '\n';
      return 0;
    }
    if (*va) {
      if (v_acc.empty() && v_wl.empty()) throw ValidationError("nothing to validate");
      std::optional<Accelerator> acc;
      std::optional<WorkloadGraph> g;
      if (!v_acc.empty()) {
        acc = load_accelerator(resolve_config(v_acc, "accelerators"));
        out << "accelerator " << acc->name() << ": ok\n";
      }
      if (!v_wl.empty()) {
        g = load_workload(resolve_config(v_wl, "workloads"));
        out << "workload " << g->name() << ": ok\n";
      }
      if (!v_stacks.empty()) {
        if (!acc || !g) throw ValidationError("--stacks needs both --accelerator and --workload");
        out << describe(make_plan(*g, *acc, v_stacks)) << '\n';
      }
      return 0;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return 3;
  } catch (const RoutingError& e) {
    err << "routing error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace fusecost::cli

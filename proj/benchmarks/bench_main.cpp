// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "fusecost/engine.hpp"

using namespace fusecost;

namespace {

const WorkloadGraph& fsrcnn() {
  static const WorkloadGraph g = load_workload(FUSECOST_BENCH_CONFIG_DIR "/workloads/fsrcnn_like.json");
  return g;
}

const Accelerator& meta() {
  static const Accelerator a = load_accelerator(FUSECOST_BENCH_CONFIG_DIR "/accelerators/meta_proto_df.json");
  return a;
}

void BM_SearchMapping(benchmark::State& state) {
  LayerInstance l;
  l.bounds = {32, 32, 60, 72, 3, 3};
  const int lpf = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(search_mapping(l, meta(), lpf).cost.energy_pJ);
}
BENCHMARK(BM_SearchMapping)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_IdentifyTileTypes(benchmark::State& state) {
  StackGeometry geom(fsrcnn(), whole_graph_plan(fsrcnn()).stacks.front());
  const auto grid = tile_grid(960, 540, state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(identify_tile_types(geom, OverlapMode::FullyCached, grid).size());
}
BENCHMARK(BM_IdentifyTileTypes)->Args({1, 1})->Args({60, 72})->Args({960, 540});

// Fresh engine each iteration so the mapper memo starts empty.
void BM_Evaluate(benchmark::State& state) {
  const auto plan = auto_stack(fsrcnn(), meta());
  const auto mode = overlap_mode_from_int(static_cast<int>(state.range(2)));
  for (auto _ : state) {
    Engine e(fsrcnn(), meta());
    benchmark::DoNotOptimize(e.evaluate(uniform_strategy(fsrcnn(), plan, state.range(0), state.range(1), mode)));
  }
}
BENCHMARK(BM_Evaluate)->Args({60, 72, 2})->Args({4, 72, 2})->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
BENCHMARK_MAIN();

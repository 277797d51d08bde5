#include <benchmark/benchmark.h>

#include "modx/modularizer.hpp"
#include "modx/synthetic.hpp"
#include "modx/tpl_db.hpp"
#include "modx/volume_weighting.hpp"

using namespace modx;

static void BM_PropagateVolumes(benchmark::State& state) {
  const auto g = synthetic::scale_graph(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_volumes(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PropagateVolumes)->RangeMultiplier(4)->Range(500, 8000)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_Modularize(benchmark::State& state) {
  const auto w = propagate_volumes(synthetic::scale_graph(static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(modularize(w));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Modularize)->RangeMultiplier(4)->Range(500, 8000)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_ModularizePlanted(benchmark::State& state) {
  const auto w = propagate_volumes(synthetic::planted({}).graph);
  ModularizerConfig cfg;
  cfg.ds_limit_divisor = 1;
  for (auto _ : state) benchmark::DoNotOptimize(modularize(w, cfg));
}
BENCHMARK(BM_ModularizePlanted)->Unit(benchmark::kMillisecond);

static void BM_SignProgram(benchmark::State& state) {
  const auto g = synthetic::scale_graph(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(sign_program(g, PipelineConfig{}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SignProgram)->RangeMultiplier(4)->Range(500, 8000)->Unit(benchmark::kMillisecond)->Complexity();

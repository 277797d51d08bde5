#include <benchmark/benchmark.h>

#include "modx/detector.hpp"
#include "modx/similarity.hpp"
#include "modx/synthetic.hpp"

using namespace modx;

namespace {

DetectionSettings desk() {
  DetectionSettings s;
  s.pipeline.modularizer.ds_limit_divisor = 1;
  return s;
}

synthetic::PlantedGraph make_library(const char* name, std::uint64_t seed, LibrarySignature& out) {
  synthetic::LibraryParams params;
  params.name = name;
  params.min_module_size = 6;
  params.max_module_size = 14;
  params.seed = seed;
  auto lib = synthetic::library(params);
  Partition partition;
  out.library_name = name;
  out.ref_frequency = 8;
  out.modules = sign_program(lib.graph, desk().pipeline, &partition);
  lib.plant = partition.labels();
  return lib;
}

struct Corpus {
  SignatureDatabase db;
  synthetic::PlantedGraph source;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus out;
    const char* names[] = {"liba", "libb", "libc", "libd", "libe", "libf"};
    for (std::uint64_t i = 0; i < 6; ++i) {
      LibrarySignature sig;
      auto lib = make_library(names[i], 10 + i, sig);
      if (i == 0) out.source = std::move(lib);
      out.db.add_library(std::move(sig));
    }
    return out;
  }();
  return c;
}

}  // namespace

static void BM_AggregateSimilarity(benchmark::State& state) {
  const auto& lib = corpus().db.libraries()[0];
  const auto& other = corpus().db.libraries()[1];
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = lib.modules[i % lib.modules.size()];
    const auto& b = other.modules[(i * 7) % other.modules.size()];
    benchmark::DoNotOptimize(aggregate(a, b, corpus().db.corpus_stats()));
    ++i;
  }
}
BENCHMARK(BM_AggregateSimilarity);

static void BM_Detect(benchmark::State& state) {
  const auto target = synthetic::partial_import(corpus().source, {.seed = 1}).graph;
  auto settings = desk();
  settings.detector.prefilter = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(detect(target, corpus().db, settings));
  state.SetLabel(settings.detector.prefilter ? "prefilter" : "exhaustive");
}
BENCHMARK(BM_Detect)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modx/graph_model.hpp"

// Deterministic synthetic call graphs for tests, benchmarks and demos. Every
// generator is a pure function of its parameters; the same seed always
// produces byte-identical documents on every platform.
namespace modx::synthetic {

// splitmix64-seeded xoshiro256** with portable integer/real draws (the
// standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();                            // [0, 1)
  std::uint64_t below(std::uint64_t bound);    // [0, bound), bound > 0
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi);  // [lo, hi]
  bool chance(double p) { return uniform() < p; }

 private:
  std::uint64_t s_[4];
};

// A graph together with the block each function was planted in.
struct PlantedGraph {
  ProgramGraph graph;
  std::vector<std::uint32_t> plant;  // by function index
};

struct PlantedParams {
  std::size_t blocks = 20;
  std::size_t block_size = 20;
  double p_in = 0.3;   // per ordered intra-block pair
  double p_out = 0.01; // per ordered inter-block pair
  std::uint64_t seed = 7;
};

// Stochastic block model with unit volumes; blocks occupy contiguous
// address ranges.
PlantedGraph planted(const PlantedParams& params);

// Two disjoint 3-cliques with calls in both directions.
ProgramGraph clique_pair();

struct LibraryParams {
  std::string name = "libsynth";
  std::size_t modules = 16;
  std::size_t min_module_size = 8;
  std::size_t max_module_size = 20;
  double p_extra = 0.12;       // extra forward calls inside a module
  double p_cross = 0.02;       // per function: call into another module's root
  std::uint64_t seed = 1;
};

// Library-like graph: each module is a call tree under one root plus extra
// forward calls, with its own string literals, constants, shared data and
// dispatch tables. Modules occupy contiguous address ranges.
PlantedGraph library(const LibraryParams& params);

struct PartialImportParams {
  std::size_t modules_taken = 3;
  std::size_t min_module_size = 5;  // only modules at least this large are taken
  std::size_t noise_functions = 50;
  double noise_p = 0.05;            // per ordered noise pair
  double noise_calls_root = 0.5;    // chance a taken module's root is called by noise
  bool strip_strings = false;
  std::uint64_t seed = 1;
};

struct PartialImport {
  ProgramGraph graph;
  std::vector<std::uint32_t> taken;  // plant labels of the copied modules, ascending
  std::vector<std::uint32_t> origin; // by function index: plant label, or UINT32_MAX for noise
};

// Copies `params.modules_taken` planted modules of `lib` (induced subgraph)
// and appends noise functions with random attributes at higher addresses.
PartialImport partial_import(const PlantedGraph& lib, const PartialImportParams& params);

// Removes every string literal.
ProgramGraph strip_strings(const ProgramGraph& graph);

// Sparse random call graph used for scale runs: `modules` blocks of ~size
// `n / modules` with library-style attributes.
ProgramGraph scale_graph(std::size_t n, std::uint64_t seed);

}  // namespace modx::synthetic

#pragma once

// Random inputs for property tests, all driven by the portable modx RNG.

#include <string>
#include <vector>

#include "modx/graph_model.hpp"
#include "modx/synthetic.hpp"

namespace gen {

using modx::synthetic::Rng;

struct GraphShape {
  std::size_t nodes = 8;
  double edge_p = 0.3;
  double self_p = 0.0;
  std::uint64_t max_volume = 50;
};

inline modx::FunctionNode plain_function(std::size_t i, Rng& rng, std::uint64_t max_volume) {
  modx::FunctionNode fn;
  fn.id = "f" + std::to_string(i);
  fn.address = 0x1000 + 0x20 * i;
  fn.volume = rng.between(1, max_volume);
  return fn;
}

inline modx::ProgramGraph random_graph(const GraphShape& shape, Rng& rng) {
  std::vector<modx::FunctionNode> fns;
  for (std::size_t i = 0; i < shape.nodes; ++i) fns.push_back(plain_function(i, rng, shape.max_volume));
  std::vector<modx::CallEdge> edges;
  for (std::size_t i = 0; i < shape.nodes; ++i) {
    for (std::size_t j = 0; j < shape.nodes; ++j) {
      const double p = i == j ? shape.self_p : shape.edge_p;
      if (rng.chance(p)) edges.push_back({fns[i].id, fns[j].id, 1});
    }
  }
  modx::ProgramGraph g("random", std::move(fns), std::move(edges));
  g.assign_ordinals();
  return g;
}

// Random graph made weakly connected by a random spanning tree.
inline modx::ProgramGraph random_connected_graph(const GraphShape& shape, Rng& rng) {
  std::vector<modx::FunctionNode> fns;
  for (std::size_t i = 0; i < shape.nodes; ++i) fns.push_back(plain_function(i, rng, shape.max_volume));
  std::vector<std::vector<bool>> has(shape.nodes, std::vector<bool>(shape.nodes, false));
  for (std::size_t i = 1; i < shape.nodes; ++i) {
    const std::size_t j = rng.below(i);
    if (rng.chance(0.5)) has[i][j] = true; else has[j][i] = true;
  }
  for (std::size_t i = 0; i < shape.nodes; ++i) {
    for (std::size_t j = 0; j < shape.nodes; ++j) {
      if (i != j && rng.chance(shape.edge_p)) has[i][j] = true;
    }
  }
  std::vector<modx::CallEdge> edges;
  for (std::size_t i = 0; i < shape.nodes; ++i) {
    for (std::size_t j = 0; j < shape.nodes; ++j) {
      if (has[i][j]) edges.push_back({fns[i].id, fns[j].id, 1});
    }
  }
  modx::ProgramGraph g("connected", std::move(fns), std::move(edges));
  g.assign_ordinals();
  return g;
}

// Random rooted tree with edges parent -> child; node 0 is the root.
inline modx::ProgramGraph random_tree(std::size_t n, Rng& rng, std::uint64_t max_volume = 100) {
  std::vector<modx::FunctionNode> fns;
  for (std::size_t i = 0; i < n; ++i) fns.push_back(plain_function(i, rng, max_volume));
  std::vector<modx::CallEdge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.push_back({fns[rng.below(i)].id, fns[i].id, 1});
  modx::ProgramGraph g("tree", std::move(fns), std::move(edges));
  g.assign_ordinals();
  return g;
}

inline modx::Partition random_partition(std::size_t n, std::size_t max_modules, Rng& rng) {
  std::vector<modx::Partition::ModuleId> labels(n);
  for (auto& l : labels) l = static_cast<modx::Partition::ModuleId>(rng.below(max_modules));
  return modx::Partition(labels);
}

// Function with library-style attributes drawn from small pools so that
// unrelated functions still overlap on some features.
inline modx::FunctionNode attributed_function(const std::string& id, std::uint64_t address, Rng& rng) {
  modx::FunctionNode fn;
  fn.id = id;
  fn.address = address;
  fn.volume = rng.between(1, 300);
  fn.bb_count = rng.between(0, 30);
  fn.cfg_edge_count = rng.between(0, 40);
  const std::size_t strings = rng.below(4);
  for (std::size_t s = 0; s < strings; ++s) fn.strings.insert("literal_" + std::to_string(rng.below(12)));
  const std::size_t constants = rng.below(5);
  for (std::size_t c = 0; c < constants; ++c) fn.constants.push_back(static_cast<std::int64_t>(rng.below(16)) - 3);
  if (rng.chance(0.4)) fn.data_refs.insert("d" + std::to_string(rng.below(3)));
  fn.is_dispatch_target = rng.chance(0.25);
  return fn;
}

inline modx::ProgramGraph random_module_graph(std::size_t n, Rng& rng, double edge_p = 0.3) {
  std::vector<modx::FunctionNode> fns;
  for (std::size_t i = 0; i < n; ++i) fns.push_back(attributed_function("g" + std::to_string(i), 0x100 * (i + 1), rng));
  std::vector<modx::CallEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && rng.chance(edge_p)) edges.push_back({fns[i].id, fns[j].id, 1});
    }
  }
  modx::ProgramGraph g("module", std::move(fns), std::move(edges));
  g.assign_ordinals();
  return g;
}

}  // namespace gen

#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "modx/graph_model.hpp"

namespace modx {

struct PropagationConfig {
  double c = 1.0;  // normalization factor applied to propagated volume
};

struct WeightedEdge {
  std::size_t src;
  std::size_t dst;
  double weight;
};

// Call graph after volume propagation. Edge weights equal the final
// function-volume (FV) weight of the callee.
struct WeightedGraph {
  const ProgramGraph* base = nullptr;  // null for hand-built graphs
  std::vector<double> fv;
  std::vector<std::size_t> ordinal;
  std::vector<WeightedEdge> edges;
  std::vector<double> k_out;
  std::vector<double> k_in;
  double total_weight = 0.0;

  std::size_t size() const { return fv.size(); }

  // Builds degree tables and W from `edges`. Ordinals default to identity.
  static WeightedGraph from_edges(std::size_t n, std::vector<WeightedEdge> edges);
  // Same topology as `graph` with every edge weight 1 (the directed MQ view).
  static WeightedGraph unit(const ProgramGraph& graph);

  void recompute_degrees();
};

// Mutable directed view used by the elimination procedure. Self-loops are
// never stored.
class WorkingDigraph {
 public:
  explicit WorkingDigraph(std::size_t n) : out_(n), in_(n), alive_(n, true), live_count_(n) {}
  explicit WorkingDigraph(const ProgramGraph& graph);

  void add_edge(std::size_t src, std::size_t dst);
  void remove_node(std::size_t v);
  // Collapses `members` into `into` (one of the members). Edges among the
  // members disappear; external edges are redirected to `into`.
  void contract(const std::vector<std::size_t>& members, std::size_t into);

  bool alive(std::size_t v) const { return alive_[v]; }
  std::size_t live_count() const { return live_count_; }
  std::size_t capacity() const { return alive_.size(); }
  const std::set<std::size_t>& successors(std::size_t v) const { return out_[v]; }
  const std::set<std::size_t>& predecessors(std::size_t v) const { return in_[v]; }

 private:
  std::vector<std::set<std::size_t>> out_;
  std::vector<std::set<std::size_t>> in_;
  std::vector<bool> alive_;
  std::size_t live_count_;
};

// Live nodes with out-degree 0, ascending.
std::vector<std::size_t> end_nodes(const WorkingDigraph& graph);

// Strongly connected components of the live part of `graph`.
std::vector<std::vector<std::size_t>> strongly_connected_components(const WorkingDigraph& graph);

struct EliminationStep {
  enum class Kind { kEndNodes, kCondense } kind;
  std::vector<std::size_t> nodes;
};

// Bottom-up FV propagation. Pass `trace` to record each elimination round.
WeightedGraph propagate_volumes(const ProgramGraph& graph, const PropagationConfig& config = {},
                                std::vector<EliminationStep>* trace = nullptr);

}  // namespace modx

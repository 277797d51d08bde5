#include "modx/volume_weighting.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace modx {

WeightedGraph WeightedGraph::from_edges(std::size_t n, std::vector<WeightedEdge> edges) {
  WeightedGraph wg;
  wg.fv.assign(n, 1.0);
  wg.ordinal.resize(n);
  std::iota(wg.ordinal.begin(), wg.ordinal.end(), std::size_t{0});
  wg.edges = std::move(edges);
  wg.recompute_degrees();
  return wg;
}

WeightedGraph WeightedGraph::unit(const ProgramGraph& graph) {
  WeightedGraph wg;
  wg.base = &graph;
  wg.fv.assign(graph.size(), 1.0);
  wg.ordinal.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) wg.ordinal[i] = graph.function(i).ordinal;
  for (const auto& arc : graph.arcs()) wg.edges.push_back({arc.src, arc.dst, 1.0});
  wg.recompute_degrees();
  return wg;
}

void WeightedGraph::recompute_degrees() {
  k_out.assign(fv.size(), 0.0);
  k_in.assign(fv.size(), 0.0);
  total_weight = 0.0;
  for (const auto& e : edges) {
    k_out[e.src] += e.weight;
    k_in[e.dst] += e.weight;
    total_weight += e.weight;
  }
}

// ---------------------------------------------------------------------------

WorkingDigraph::WorkingDigraph(const ProgramGraph& graph) : WorkingDigraph(graph.size()) {
  for (const auto& arc : graph.arcs()) add_edge(arc.src, arc.dst);
}

void WorkingDigraph::add_edge(std::size_t src, std::size_t dst) {
  if (src == dst) return;
  out_[src].insert(dst);
  in_[dst].insert(src);
}

void WorkingDigraph::remove_node(std::size_t v) {
  if (!alive_[v]) return;
  for (std::size_t w : out_[v]) in_[w].erase(v);
  for (std::size_t u : in_[v]) out_[u].erase(v);
  out_[v].clear();
  in_[v].clear();
  alive_[v] = false;
  --live_count_;
}

void WorkingDigraph::contract(const std::vector<std::size_t>& members, std::size_t into) {
  const std::set<std::size_t> group(members.begin(), members.end());
  std::set<std::size_t> ext_out, ext_in;
  for (std::size_t m : members) {
    for (std::size_t w : out_[m]) {
      if (!group.count(w)) ext_out.insert(w);
    }
    for (std::size_t u : in_[m]) {
      if (!group.count(u)) ext_in.insert(u);
    }
  }
  for (std::size_t m : members) {
    if (m != into) remove_node(m);
  }
  for (std::size_t w : std::set<std::size_t>(out_[into])) {
    in_[w].erase(into);
  }
  for (std::size_t u : std::set<std::size_t>(in_[into])) {
    out_[u].erase(into);
  }
  out_[into].clear();
  in_[into].clear();
  for (std::size_t w : ext_out) add_edge(into, w);
  for (std::size_t u : ext_in) add_edge(u, into);
}

std::vector<std::size_t> end_nodes(const WorkingDigraph& graph) {
  std::vector<std::size_t> result;
  for (std::size_t v = 0; v < graph.capacity(); ++v) {
    if (graph.alive(v) && graph.successors(v).empty()) result.push_back(v);
  }
  return result;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const WorkingDigraph& graph) {
  // Iterative Tarjan.
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  const std::size_t n = graph.capacity();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::set<std::size_t>::const_iterator next;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (!graph.alive(root) || index[root] != kUnvisited) continue;
    call.push_back({root, graph.successors(root).begin()});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& frame = call.back();
      const std::size_t v = frame.v;
      if (frame.next != graph.successors(v).end()) {
        const std::size_t w = *frame.next++;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, graph.successors(w).begin()});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> component;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back(w);
        } while (w != v);
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
      }
      call.pop_back();
      if (!call.empty()) {
        low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  return components;
}

// ---------------------------------------------------------------------------

WeightedGraph propagate_volumes(const ProgramGraph& graph, const PropagationConfig& config,
                                std::vector<EliminationStep>* trace) {
  const std::size_t n = graph.size();
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) fv[i] = static_cast<double>(graph.function(i).volume);

  WorkingDigraph work(graph);

  // Removing end nodes or a sink component never changes the strongly
  // connected components among the remaining nodes, so they are computed once.
  const auto components = strongly_connected_components(work);
  std::vector<std::size_t> component_of(n);
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (std::size_t v : components[c]) component_of[v] = c;
  }
  std::vector<std::size_t> external_out(components.size(), 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w : work.successors(v)) {
      if (component_of[w] != component_of[v]) ++external_out[component_of[v]];
    }
  }
  auto min_ordinal = [&](std::size_t c) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t v : components[c]) best = std::min(best, graph.function(v).ordinal);
    return best;
  };
  // Cyclic components with no remaining way out, keyed by smallest ordinal.
  std::set<std::pair<std::size_t, std::size_t>> ready;
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (components[c].size() > 1 && external_out[c] == 0) ready.emplace(min_ordinal(c), c);
  }

  // Condensed groups: representative -> members, member FV at condensation.
  std::vector<std::vector<std::size_t>> group(n);
  std::vector<double> condensed_fv(n, 0.0);
  std::vector<double> at_condense(n, 0.0);

  std::vector<std::size_t> frontier = end_nodes(work);
  while (work.live_count() > 0) {
    if (frontier.empty()) {
      // Every live node calls something: collapse one terminal cycle.
      const std::size_t c = ready.begin()->second;
      ready.erase(ready.begin());
      const auto& members = components[c];
      const std::size_t rep = *std::min_element(members.begin(), members.end(), [&](auto a, auto b) {
        return graph.function(a).ordinal < graph.function(b).ordinal;
      });
      std::map<std::size_t, std::size_t> parallel;  // external caller -> edges into the cycle
      for (std::size_t m : members) {
        for (std::size_t u : work.predecessors(m)) {
          if (component_of[u] != c) ++parallel[u];
        }
      }
      for (const auto& [u, count] : parallel) external_out[component_of[u]] -= count - 1;
      double sum = 0.0;
      for (std::size_t m : members) {
        at_condense[m] = fv[m];
        sum += fv[m];
      }
      work.contract(members, rep);
      group[rep] = members;
      condensed_fv[rep] = sum;
      fv[rep] = sum;
      if (trace) trace->push_back({EliminationStep::Kind::kCondense, members});
      frontier = {rep};
      continue;
    }

    std::sort(frontier.begin(), frontier.end());
    if (trace) trace->push_back({EliminationStep::Kind::kEndNodes, frontier});
    std::vector<std::size_t> next;
    for (std::size_t v : frontier) {
      const std::vector<std::size_t> parents(work.predecessors(v).begin(), work.predecessors(v).end());
      const double share = config.c * fv[v] / static_cast<double>(std::max<std::size_t>(parents.size(), 1));
      for (std::size_t u : parents) fv[u] += share;
      // Member FVs are restored below, so keep the representative's value.
      const double value = fv[v];
      work.remove_node(v);
      fv[v] = value;
      for (std::size_t u : parents) {
        if (component_of[u] != component_of[v]) {
          const std::size_t cu = component_of[u];
          if (--external_out[cu] == 0 && components[cu].size() > 1) ready.emplace(min_ordinal(cu), cu);
        }
        if (work.successors(u).empty()) next.push_back(u);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier = std::move(next);
  }

  // Members of a condensed cycle keep their own value plus an equal share of
  // whatever the cycle received after it was collapsed.
  std::vector<double> final_fv = fv;
  for (std::size_t rep = 0; rep < n; ++rep) {
    if (group[rep].empty()) continue;
    const double share = (fv[rep] - condensed_fv[rep]) / static_cast<double>(group[rep].size());
    for (std::size_t m : group[rep]) final_fv[m] = at_condense[m] + share;
  }

  WeightedGraph wg;
  wg.base = &graph;
  wg.fv = std::move(final_fv);
  wg.ordinal.resize(n);
  for (std::size_t i = 0; i < n; ++i) wg.ordinal[i] = graph.function(i).ordinal;
  for (const auto& arc : graph.arcs()) wg.edges.push_back({arc.src, arc.dst, wg.fv[arc.dst]});
  wg.recompute_degrees();
  return wg;
}

}  // namespace modx

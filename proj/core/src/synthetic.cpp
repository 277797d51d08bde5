#include "modx/synthetic.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace modx::synthetic {

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

std::uint64_t Rng::between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

// ---------------------------------------------------------------------------

PlantedGraph planted(const PlantedParams& params) {
  if (params.blocks == 0 || params.block_size == 0) throw std::invalid_argument("planted: empty block structure");
  check_probability(params.p_in, "p_in");
  check_probability(params.p_out, "p_out");
  Rng rng(params.seed);
  const std::size_t n = params.blocks * params.block_size;

  std::vector<FunctionNode> functions(n);
  PlantedGraph out;
  out.plant.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    functions[i].id = "f" + std::to_string(i);
    functions[i].address = 0x1000 + 0x10 * i;
    out.plant[i] = static_cast<std::uint32_t>(i / params.block_size);
  }
  std::vector<CallEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = out.plant[i] == out.plant[j] ? params.p_in : params.p_out;
      if (rng.chance(p)) edges.push_back({functions[i].id, functions[j].id, 1});
    }
  }
  out.graph = ProgramGraph("planted-" + std::to_string(params.seed), std::move(functions), std::move(edges));
  out.graph.assign_ordinals();
  return out;
}

ProgramGraph clique_pair() {
  std::vector<FunctionNode> functions(6);
  for (std::size_t i = 0; i < 6; ++i) {
    functions[i].id = std::string(1, static_cast<char>('a' + i));
    functions[i].address = 0x100 * (i + 1);
  }
  std::vector<CallEdge> edges;
  for (std::size_t base : {0u, 3u}) {
    for (std::size_t i = base; i < base + 3; ++i) {
      for (std::size_t j = base; j < base + 3; ++j) {
        if (i != j) edges.push_back({functions[i].id, functions[j].id, 1});
      }
    }
  }
  ProgramGraph graph("clique-pair", std::move(functions), std::move(edges));
  graph.assign_ordinals();
  return graph;
}

// ---------------------------------------------------------------------------

namespace {

void random_body(Rng& rng, FunctionNode& fn) {
  fn.volume = rng.between(5, 240);
  fn.bb_count = rng.between(1, fn.volume / 4 + 1);
  fn.cfg_edge_count = fn.bb_count - 1 + rng.between(0, fn.bb_count);
}

PlantedGraph build_library(const std::string& name, const std::vector<std::size_t>& sizes, double p_extra,
                           double p_cross, Rng& rng) {
  check_probability(p_extra, "p_extra");
  check_probability(p_cross, "p_cross");
  PlantedGraph out;
  std::vector<FunctionNode> functions;
  std::vector<CallEdge> edges;
  std::vector<std::size_t> roots;
  std::set<std::pair<std::size_t, std::size_t>> linked;
  const std::uint64_t base_address = 0x400000;

  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const std::size_t first = functions.size();
    roots.push_back(first);
    const std::string prefix = name + "_m" + std::to_string(k);

    std::vector<std::int64_t> pool(6);
    for (auto& c : pool) c = static_cast<std::int64_t>(rng.between(0x100, 0xffffffffULL));
    const std::size_t data_objects = rng.between(1, 3);

    for (std::size_t j = 0; j < sizes[k]; ++j) {
      FunctionNode fn;
      const std::size_t idx = functions.size();
      fn.id = "f" + std::to_string(idx);
      fn.address = base_address + 0x40 * idx;
      fn.name = prefix + "_fn" + std::to_string(j);
      random_body(rng, fn);
      if (rng.chance(0.45)) {
        const std::size_t count = rng.between(1, 2);
        for (std::size_t s = 0; s < count; ++s) {
          fn.strings.insert(prefix + "_msg_" + std::to_string(j) + "_" + std::to_string(s));
        }
      }
      if (rng.chance(0.2)) fn.strings.insert("ok");  // below the literal length floor
      const std::size_t constants = rng.between(0, 4);
      for (std::size_t c = 0; c < constants; ++c) {
        fn.constants.push_back(rng.chance(0.25) ? static_cast<std::int64_t>(rng.below(2)) : pool[rng.below(pool.size())]);
      }
      for (std::size_t d = 0; d < data_objects; ++d) {
        if (rng.chance(0.3)) fn.data_refs.insert("0x" + std::to_string(0x600000 + 0x100 * k + 8 * d));
      }
      fn.is_dispatch_target = j > 0 && rng.chance(0.2);
      fn.is_export = j == 0;
      functions.push_back(std::move(fn));
      out.plant.push_back(static_cast<std::uint32_t>(k));

      if (j > 0) {
        const std::size_t parent = first + rng.below(j);
        edges.push_back({functions[parent].id, functions[idx].id, static_cast<std::uint32_t>(rng.between(1, 3))});
        linked.emplace(parent, idx);
      }
    }
    // Extra forward calls, skipping pairs the tree already linked.
    for (std::size_t a = first; a < functions.size(); ++a) {
      for (std::size_t b = a + 1; b < functions.size(); ++b) {
        if (rng.chance(p_extra) && linked.emplace(a, b).second) edges.push_back({functions[a].id, functions[b].id, 1});
      }
    }
  }

  // Occasional calls into other modules' roots (shared helpers).
  if (sizes.size() > 1) {
    for (std::size_t i = 0; i < functions.size(); ++i) {
      if (!rng.chance(p_cross)) continue;
      std::size_t target = roots[rng.below(roots.size())];
      if (out.plant[target] == out.plant[i]) continue;
      if (linked.emplace(i, target).second) edges.push_back({functions[i].id, functions[target].id, 1});
    }
  }
  out.graph = ProgramGraph(name, std::move(functions), std::move(edges));
  out.graph.assign_ordinals();
  return out;
}

}  // namespace

PlantedGraph library(const LibraryParams& params) {
  if (params.modules == 0) throw std::invalid_argument("library: at least one module required");
  if (params.min_module_size == 0 || params.min_module_size > params.max_module_size) {
    throw std::invalid_argument("library: invalid module size range");
  }
  Rng rng(params.seed);
  std::vector<std::size_t> sizes(params.modules);
  for (auto& s : sizes) s = rng.between(params.min_module_size, params.max_module_size);
  return build_library(params.name, sizes, params.p_extra, params.p_cross, rng);
}

ProgramGraph scale_graph(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("scale_graph: n must be positive");
  Rng rng(seed);
  std::vector<std::size_t> sizes;
  std::size_t left = n;
  while (left > 0) {
    const std::size_t s = std::min<std::size_t>(left, rng.between(10, 30));
    sizes.push_back(s);
    left -= s;
  }
  return build_library("scale-" + std::to_string(n), sizes, 0.1, 0.02, rng).graph;
}

// ---------------------------------------------------------------------------

PartialImport partial_import(const PlantedGraph& lib, const PartialImportParams& params) {
  check_probability(params.noise_p, "noise_p");
  check_probability(params.noise_calls_root, "noise_calls_root");
  Rng rng(params.seed);
  const ProgramGraph& g = lib.graph;

  std::vector<std::size_t> module_size;
  for (auto label : lib.plant) {
    if (label >= module_size.size()) module_size.resize(label + 1, 0);
    ++module_size[label];
  }
  std::vector<std::uint32_t> eligible;
  for (std::uint32_t k = 0; k < module_size.size(); ++k) {
    if (module_size[k] >= params.min_module_size) eligible.push_back(k);
  }
  if (eligible.size() < params.modules_taken) throw std::invalid_argument("partial_import: not enough modules");
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < params.modules_taken; ++i) {
    std::swap(eligible[i], eligible[i + rng.below(eligible.size() - i)]);
  }
  PartialImport out;
  out.taken.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(params.modules_taken));
  std::sort(out.taken.begin(), out.taken.end());

  std::vector<FunctionNode> functions;
  std::vector<bool> keep(g.size(), false);
  std::uint64_t max_address = 0;
  std::vector<std::size_t> roots;
  std::set<std::uint32_t> seen;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::binary_search(out.taken.begin(), out.taken.end(), lib.plant[i])) continue;
    keep[i] = true;
    if (seen.insert(lib.plant[i]).second) roots.push_back(functions.size());  // lowest-address member
    functions.push_back(g.function(i));
    out.origin.push_back(lib.plant[i]);
    max_address = std::max(max_address, g.function(i).address);
  }
  std::vector<CallEdge> edges;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (keep[g.arcs()[e].src] && keep[g.arcs()[e].dst]) edges.push_back(g.edges()[e]);
  }

  const std::size_t noise_first = functions.size();
  std::vector<std::int64_t> pool(8);
  for (auto& c : pool) c = static_cast<std::int64_t>(rng.between(0x100, 0xffffffffULL));
  for (std::size_t j = 0; j < params.noise_functions; ++j) {
    FunctionNode fn;
    fn.id = "n" + std::to_string(j);
    fn.address = max_address + 0x1000 + 0x40 * j;
    random_body(rng, fn);
    if (rng.chance(0.3)) fn.strings.insert("host_message_" + std::to_string(j));
    const std::size_t constants = rng.between(0, 4);
    for (std::size_t c = 0; c < constants; ++c) fn.constants.push_back(pool[rng.below(pool.size())]);
    if (rng.chance(0.2)) fn.data_refs.insert("0x" + std::to_string(0x900000 + 8 * rng.below(6)));
    fn.is_dispatch_target = rng.chance(0.1);
    functions.push_back(std::move(fn));
    out.origin.push_back(std::numeric_limits<std::uint32_t>::max());
  }
  for (std::size_t a = noise_first; a < functions.size(); ++a) {
    for (std::size_t b = noise_first; b < functions.size(); ++b) {
      if (a != b && rng.chance(params.noise_p)) edges.push_back({functions[a].id, functions[b].id, 1});
    }
  }
  if (params.noise_functions > 0) {
    for (std::size_t r : roots) {
      if (!rng.chance(params.noise_calls_root)) continue;
      const std::size_t caller = noise_first + rng.below(params.noise_functions);
      edges.push_back({functions[caller].id, functions[r].id, 1});
    }
  }
  out.graph = ProgramGraph(g.program_name + "-partial-" + std::to_string(params.seed), std::move(functions),
                           std::move(edges));
  out.graph.assign_ordinals();
  if (params.strip_strings) out.graph = strip_strings(out.graph);
  return out;
}

ProgramGraph strip_strings(const ProgramGraph& graph) {
  std::vector<FunctionNode> functions = graph.functions();
  for (auto& fn : functions) fn.strings.clear();
  ProgramGraph out(graph.program_name, std::move(functions), graph.edges());
  out.assign_ordinals();
  return out;
}

}  // namespace modx::synthetic

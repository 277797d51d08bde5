#include "modx/module_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace modx {

void FeatureConfig::validate() const {
  if (kernel_iterations < 1) throw std::invalid_argument("kernel_iterations must be >= 1");
  if (!(kernel_bin_width > 0.0)) throw std::invalid_argument("kernel_bin_width must be > 0");
}

FunctionVector function_vector(const ProgramGraph& graph, std::size_t fn) {
  const FunctionNode& f = graph.function(fn);
  auto lg = [](double x) { return std::log1p(x); };
  FunctionVector v{
      lg(static_cast<double>(f.volume)),
      lg(static_cast<double>(f.bb_count)),
      lg(static_cast<double>(f.cfg_edge_count)),
      lg(static_cast<double>(graph.callers(fn).size())),
      lg(static_cast<double>(graph.callees(fn).size())),
      lg(static_cast<double>(f.strings.size())),
      lg(static_cast<double>(f.constants.size())),
      lg(static_cast<double>(f.data_refs.size())),
  };
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return v;
}

FunctionVector StatisticalEmbedder::embed(const ProgramGraph& graph, std::size_t fn) const {
  return function_vector(graph, fn);
}

CorpusStats CorpusStats::from_modules(const std::vector<const ModuleSignature*>& modules) {
  CorpusStats stats;
  stats.module_count = modules.size();
  for (const ModuleSignature* m : modules) {
    for (const auto& [constant, count] : m->constant_bag) ++stats.document_frequency[constant];
  }
  return stats;
}

ModuleSubgraph module_subgraph(const ProgramGraph& graph, const std::vector<std::size_t>& members) {
  ModuleSubgraph sub;
  sub.functions = members;
  std::sort(sub.functions.begin(), sub.functions.end(), [&](std::size_t a, std::size_t b) {
    return graph.function(a).ordinal < graph.function(b).ordinal;
  });
  std::unordered_map<std::size_t, std::size_t> local;
  for (std::size_t i = 0; i < sub.functions.size(); ++i) local.emplace(sub.functions[i], i);
  for (std::size_t i = 0; i < sub.functions.size(); ++i) {
    for (std::size_t e : graph.out_edges(sub.functions[i])) {
      const std::size_t dst = graph.arcs()[e].dst;
      auto it = local.find(dst);
      if (it != local.end() && it->second != i) sub.edges.emplace_back(i, it->second);
    }
  }
  std::sort(sub.edges.begin(), sub.edges.end());
  return sub;
}

namespace {

std::uint64_t hash_bins(const std::array<std::int64_t, kFunctionDims>& q) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (std::int64_t x : q) {
    auto u = static_cast<std::uint64_t>(x);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (u >> (8 * byte)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

KernelHistogram quantize(const std::vector<FunctionVector>& dist, double width) {
  KernelHistogram hist;
  for (const auto& p : dist) {
    std::array<std::int64_t, kFunctionDims> q{};
    for (std::size_t d = 0; d < kFunctionDims; ++d) q[d] = static_cast<std::int64_t>(std::floor(p[d] / width));
    ++hist[hash_bins(q)];
  }
  return hist;
}

}  // namespace

std::vector<KernelHistogram> kernel_signature(const ModuleSubgraph& sub, const std::vector<FunctionVector>& vectors,
                                              const FeatureConfig& config) {
  const std::size_t n = sub.functions.size();
  std::vector<std::vector<std::size_t>> adjacent(n);
  for (const auto& [a, b] : sub.edges) {
    adjacent[a].push_back(b);
    adjacent[b].push_back(a);
  }
  for (auto& list : adjacent) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<FunctionVector> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (double x : vectors[i]) sum += x;
    for (std::size_t d = 0; d < kFunctionDims; ++d) {
      dist[i][d] = sum > 0.0 ? vectors[i][d] / sum : (d == 0 ? 1.0 : 0.0);
    }
  }

  std::vector<KernelHistogram> result;
  result.push_back(quantize(dist, config.kernel_bin_width));
  std::vector<FunctionVector> gathered;
  for (std::size_t t = 1; t <= config.kernel_iterations; ++t) {
    std::vector<FunctionVector> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (adjacent[i].empty()) {
        next[i] = dist[i];
        continue;
      }
      // Sum neighbours in value order so relabelled modules round identically.
      gathered.clear();
      for (std::size_t j : adjacent[i]) gathered.push_back(dist[j]);
      std::sort(gathered.begin(), gathered.end());
      FunctionVector mean{};
      for (const auto& p : gathered) {
        for (std::size_t d = 0; d < kFunctionDims; ++d) mean[d] += p[d];
      }
      const double count = static_cast<double>(gathered.size());
      for (std::size_t d = 0; d < kFunctionDims; ++d) next[i][d] = 0.5 * (dist[i][d] + mean[d] / count);
    }
    dist = std::move(next);
    result.push_back(quantize(dist, config.kernel_bin_width));
  }
  return result;
}

std::vector<EdgeVector> edge_vectors(const ModuleSubgraph& sub, const std::vector<FunctionVector>& vectors) {
  std::vector<EdgeVector> result;
  result.reserve(sub.edges.size());
  for (const auto& [a, b] : sub.edges) {
    EdgeVector v{};
    std::copy(vectors[a].begin(), vectors[a].end(), v.begin());
    std::copy(vectors[b].begin(), vectors[b].end(), v.begin() + kFunctionDims);
    result.push_back(v);
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<AnchorGroup> anchor_groups(const ProgramGraph& graph, const ModuleSubgraph& sub) {
  const std::size_t n = sub.functions.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::unordered_map<std::string, std::size_t> owner;
  std::vector<bool> shares(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ref : graph.function(sub.functions[i]).data_refs) {
      auto [it, inserted] = owner.emplace(ref, i);
      if (!inserted) {
        shares[i] = shares[it->second] = true;
        const std::size_t a = find(i), b = find(it->second);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  auto by_volume = [&](std::vector<std::size_t>& members) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return graph.function(sub.functions[a]).volume > graph.function(sub.functions[b]).volume;
    });
  };

  std::vector<AnchorGroup> groups;
  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) {
    if (shares[i]) components[find(i)].push_back(i);
  }
  for (auto& [root, members] : components) {
    if (members.size() < 2) continue;
    by_volume(members);
    groups.push_back({AnchorKind::kSharedData, std::move(members)});
  }

  std::vector<std::size_t> dispatch;
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.function(sub.functions[i]).is_dispatch_target) dispatch.push_back(i);
  }
  if (dispatch.size() >= 2) {
    by_volume(dispatch);
    groups.push_back({AnchorKind::kDispatch, std::move(dispatch)});
  }
  return groups;
}

SparseVector tfidf_vector(const ConstantBag& bag, const CorpusStats& stats) {
  SparseVector v;
  if (stats.module_count == 0) return v;
  const double n = static_cast<double>(stats.module_count);
  for (const auto& [constant, tf] : bag) {
    auto it = stats.document_frequency.find(constant);
    const double df = it == stats.document_frequency.end() ? 0.0 : static_cast<double>(it->second);
    const double weight = static_cast<double>(tf) * std::log(n / (1.0 + df));
    if (weight > 0.0) v.emplace(constant, weight);
  }
  return v;
}

ModuleSignature extract_signature(const ProgramGraph& graph, const Partition& partition,
                                  Partition::ModuleId module, const FeatureConfig& config,
                                  const FunctionEmbedder& embedder) {
  config.validate();
  if (module >= partition.module_count()) {
    throw std::out_of_range("unknown module id " + std::to_string(module));
  }
  std::vector<std::size_t> members;
  for (std::size_t fn = 0; fn < partition.size(); ++fn) {
    if (partition.module_of(fn) == module) members.push_back(fn);
  }
  const ModuleSubgraph sub = module_subgraph(graph, members);

  ModuleSignature sig;
  sig.module_id = module;
  sig.function_count = sub.functions.size();
  std::vector<FunctionVector> vectors;
  for (std::size_t fn : sub.functions) {
    const FunctionNode& f = graph.function(fn);
    for (const auto& s : f.strings) {
      if (s.size() >= config.min_string_len) sig.string_set.insert(s);
    }
    for (std::int64_t c : f.constants) ++sig.constant_bag[c];
    vectors.push_back(embedder.embed(graph, fn));
    sig.functions.push_back({f.id, f.volume, vectors.back()});
  }
  sig.kernel_histograms = kernel_signature(sub, vectors, config);
  sig.edge_vectors = edge_vectors(sub, vectors);
  sig.anchor_groups = anchor_groups(graph, sub);
  return sig;
}

std::vector<ModuleSignature> extract_all_signatures(const ProgramGraph& graph, const Partition& partition,
                                                    const FeatureConfig& config) {
  std::vector<ModuleSignature> out;
  out.reserve(partition.module_count());
  for (Partition::ModuleId m = 0; m < partition.module_count(); ++m) {
    out.push_back(extract_signature(graph, partition, m, config));
  }
  return out;
}

}  // namespace modx

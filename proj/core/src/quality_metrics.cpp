#include "modx/quality_metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

namespace modx {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

double directed_modularity(const WeightedGraph& graph, const Partition& partition, bool unit_weights,
                           MqNormalization norm) {
  const std::size_t k = partition.module_count();
  std::vector<double> k_out(k, 0.0), k_in(k, 0.0);
  double total = 0.0, internal = 0.0;
  for (const auto& e : graph.edges) {
    const double w = unit_weights ? 1.0 : e.weight;
    total += w;
    const auto cs = partition.module_of(e.src);
    const auto cd = partition.module_of(e.dst);
    k_out[cs] += w;
    k_in[cd] += w;
    if (cs == cd) internal += w;
  }
  if (total <= 0.0) return 0.0;
  const double denom = norm == MqNormalization::kLiteral2W ? 2.0 * total : total;
  double null_model = 0.0;
  for (std::size_t c = 0; c < k; ++c) null_model += k_out[c] * k_in[c];
  return (internal - null_model / denom) / denom;
}

double cluster_factor_sum(const WeightedGraph& graph, const Partition& partition, bool unit_weights) {
  const std::size_t k = partition.module_count();
  std::vector<double> intra(k, 0.0), inter(k, 0.0);
  for (const auto& e : graph.edges) {
    const double w = unit_weights ? 1.0 : e.weight;
    const auto cs = partition.module_of(e.src);
    const auto cd = partition.module_of(e.dst);
    if (cs == cd) {
      intra[cs] += w;
    } else {
      inter[cs] += w;
      inter[cd] += w;
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (intra[c] > 0.0) sum += 2.0 * intra[c] / (2.0 * intra[c] + inter[c]);
  }
  return sum;
}

template <typename T>
double mean_of(const std::vector<T>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : values) sum += static_cast<double>(v);
  return sum / static_cast<double>(values.size());
}

}  // namespace

double origin_mq(const WeightedGraph& graph, const Partition& partition) {
  std::set<std::pair<std::size_t, std::size_t>> undirected;
  for (const auto& e : graph.edges) undirected.emplace(std::min(e.src, e.dst), std::max(e.src, e.dst));

  const std::size_t k = partition.module_count();
  std::vector<double> degree(k, 0.0);
  double within = 0.0, two_m = 0.0;
  for (const auto& [a, b] : undirected) {
    const auto ca = partition.module_of(a);
    const auto cb = partition.module_of(b);
    degree[ca] += 1.0;
    degree[cb] += 1.0;
    two_m += 2.0;
    if (ca == cb) within += 2.0;
  }
  if (two_m == 0.0) return 0.0;
  double null_model = 0.0;
  for (double d : degree) null_model += d * d;
  return (within - null_model / two_m) / two_m;
}

double weighted_directed_mq(const WeightedGraph& graph, const Partition& partition, MqNormalization norm) {
  return directed_modularity(graph, partition, false, norm);
}

double directed_mq(const WeightedGraph& graph, const Partition& partition, MqNormalization norm) {
  return directed_modularity(graph, partition, true, norm);
}

double bunch_mq(const WeightedGraph& graph, const Partition& partition) {
  return cluster_factor_sum(graph, partition, true);
}

double turbo_mq(const WeightedGraph& graph, const Partition& partition) {
  return cluster_factor_sum(graph, partition, false);
}

std::vector<std::size_t> module_entries(const WeightedGraph& graph, const Partition& partition) {
  std::vector<bool> has_internal_caller(graph.size(), false);
  for (const auto& e : graph.edges) {
    if (e.src != e.dst && partition.module_of(e.src) == partition.module_of(e.dst)) {
      has_internal_caller[e.dst] = true;
    }
  }
  std::vector<std::size_t> entries(partition.module_count(), 0);
  for (std::size_t fn = 0; fn < graph.size(); ++fn) {
    if (!has_internal_caller[fn]) ++entries[partition.module_of(fn)];
  }
  return entries;
}

std::vector<std::size_t> isolated_clusters(const WeightedGraph& graph, const Partition& partition) {
  DisjointSets sets(graph.size());
  for (const auto& e : graph.edges) {
    if (partition.module_of(e.src) == partition.module_of(e.dst)) sets.unite(e.src, e.dst);
  }
  std::vector<std::size_t> clusters(partition.module_count(), 0);
  for (std::size_t fn = 0; fn < graph.size(); ++fn) {
    if (sets.find(fn) == fn) ++clusters[partition.module_of(fn)];
  }
  return clusters;
}

double overlap_score(const Partition& generated, const Partition& labeled) {
  std::vector<std::set<Partition::ModuleId>> touched(generated.module_count());
  for (std::size_t fn = 0; fn < generated.size(); ++fn) {
    touched[generated.module_of(fn)].insert(labeled.module_of(fn));
  }
  std::vector<std::size_t> counts;
  for (const auto& t : touched) counts.push_back(t.size());
  return mean_of(counts);
}

QualityReport evaluate_quality(const WeightedGraph& weighted, const Partition& partition, MqNormalization norm) {
  QualityReport report;
  report.origin_mq = origin_mq(weighted, partition);
  report.directed_mq = directed_mq(weighted, partition, norm);
  report.weighted_directed_mq = weighted_directed_mq(weighted, partition, norm);
  report.bunch_mq = bunch_mq(weighted, partition);
  report.turbo_mq = turbo_mq(weighted, partition);
  report.avg_entries = mean_of(module_entries(weighted, partition));
  report.avg_isolated_clusters = mean_of(isolated_clusters(weighted, partition));
  return report;
}

std::string quality_report_text(const QualityReport& r) {
  std::string out;
  char line[96];
  auto row = [&](const char* key, double value) {
    std::snprintf(line, sizeof line, "%-24s %.6f\n", key, value);
    out += line;
  };
  row("origin_mq", r.origin_mq);
  row("directed_mq", r.directed_mq);
  row("weighted_directed_mq", r.weighted_directed_mq);
  row("bunch_mq", r.bunch_mq);
  row("turbo_mq", r.turbo_mq);
  row("avg_entries", r.avg_entries);
  row("avg_isolated_clusters", r.avg_isolated_clusters);
  return out;
}

std::string quality_report_json(const QualityReport& r) {
  nlohmann::ordered_json doc;
  doc["origin_mq"] = r.origin_mq;
  doc["directed_mq"] = r.directed_mq;
  doc["weighted_directed_mq"] = r.weighted_directed_mq;
  doc["bunch_mq"] = r.bunch_mq;
  doc["turbo_mq"] = r.turbo_mq;
  doc["avg_entries"] = r.avg_entries;
  doc["avg_isolated_clusters"] = r.avg_isolated_clusters;
  return doc.dump(2) + "\n";
}

}  // namespace modx

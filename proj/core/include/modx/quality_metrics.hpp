#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "modx/graph_model.hpp"
#include "modx/volume_weighting.hpp"

namespace modx {

// Denominator convention for the weighted directed modularity. The literal
// form divides by 2W twice, so a single community scores 0.25 rather than 0.
enum class MqNormalization { kLiteral2W, kPerW };

struct QualityReport {
  double origin_mq = 0.0;
  double directed_mq = 0.0;
  double weighted_directed_mq = 0.0;
  double bunch_mq = 0.0;
  double turbo_mq = 0.0;
  double avg_entries = 0.0;
  double avg_isolated_clusters = 0.0;
};

// Undirected, unweighted modularity. Reciprocal calls collapse into one
// undirected edge; a self-call contributes A_ii = 2.
double origin_mq(const WeightedGraph& graph, const Partition& partition);

double weighted_directed_mq(const WeightedGraph& graph, const Partition& partition,
                            MqNormalization norm = MqNormalization::kLiteral2W);

// weighted_directed_mq with every edge weight forced to 1.
double directed_mq(const WeightedGraph& graph, const Partition& partition,
                   MqNormalization norm = MqNormalization::kLiteral2W);

// Sum of per-module cluster factors 2*mu / (2*mu + inter-module edges).
double bunch_mq(const WeightedGraph& graph, const Partition& partition);
// Bunch MQ over edge-weight sums instead of edge counts.
double turbo_mq(const WeightedGraph& graph, const Partition& partition);

// Per module: members none of whose callers (self-calls ignored) sit inside
// the module.
std::vector<std::size_t> module_entries(const WeightedGraph& graph, const Partition& partition);

// Per module: weakly connected components of the module-induced subgraph.
std::vector<std::size_t> isolated_clusters(const WeightedGraph& graph, const Partition& partition);

// Mean number of distinct labelled modules touched by each generated module.
double overlap_score(const Partition& generated, const Partition& labeled);

// `weighted` supplies FV edge weights; the unit/structural metrics use its topology.
QualityReport evaluate_quality(const WeightedGraph& weighted, const Partition& partition,
                               MqNormalization norm = MqNormalization::kLiteral2W);

std::string quality_report_text(const QualityReport& report);
std::string quality_report_json(const QualityReport& report);

}  // namespace modx

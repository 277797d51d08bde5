#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "modx/quality_metrics.hpp"
#include "oracles.hpp"

using namespace modx;

namespace {

WeightedGraph unit_edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<WeightedEdge> edges;
  for (auto [a, b] : pairs) edges.push_back({a, b, 1.0});
  return WeightedGraph::from_edges(n, std::move(edges));
}

}  // namespace

TEST(QualityMetrics, TriangleSingleCommunity) {
  const auto g = unit_edges(3, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_NEAR(origin_mq(g, Partition({0, 0, 0})), 0.0, 1e-15);
}

TEST(QualityMetrics, TriangleSingletons) {
  const auto g = unit_edges(3, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_NEAR(origin_mq(g, Partition::singletons(3)), -1.0 / 3.0, 1e-15);
}

TEST(QualityMetrics, TwoTriangles) {
  const auto g = unit_edges(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
  EXPECT_NEAR(origin_mq(g, Partition({0, 0, 0, 1, 1, 1})), 0.5, 1e-15);
}

TEST(QualityMetrics, ReciprocalCallsCollapse) {
  const auto one_way = unit_edges(3, {{0, 1}, {1, 2}});
  const auto both_ways = unit_edges(3, {{0, 1}, {1, 0}, {1, 2}});
  const Partition p({0, 0, 1});
  EXPECT_DOUBLE_EQ(origin_mq(one_way, p), origin_mq(both_ways, p));
}

TEST(QualityMetrics, SingleWeightedEdge) {
  const auto g = WeightedGraph::from_edges(2, {{0, 1, 4.0}});
  EXPECT_DOUBLE_EQ(weighted_directed_mq(g, Partition({0, 0})), 0.25);
  EXPECT_DOUBLE_EQ(weighted_directed_mq(g, Partition({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(weighted_directed_mq(g, Partition({0, 0}), MqNormalization::kPerW), 0.0);
}

TEST(QualityMetrics, EdgelessGraphsScoreZero) {
  const auto g = WeightedGraph::from_edges(3, {});
  const auto p = Partition::singletons(3);
  EXPECT_EQ(origin_mq(g, p), 0.0);
  EXPECT_EQ(weighted_directed_mq(g, p), 0.0);
  EXPECT_EQ(bunch_mq(g, p), 0.0);
  EXPECT_EQ(turbo_mq(g, p), 0.0);
}

TEST(QualityMetrics, BunchAndTurbo) {
  const auto g = unit_edges(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}, {1, 2}});
  const Partition p({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(bunch_mq(g, p), 1.6);
  EXPECT_DOUBLE_EQ(bunch_mq(g, Partition({0, 0, 0, 0})), 1.0);

  const auto w = WeightedGraph::from_edges(4, {{0, 1, 2.0}, {2, 3, 2.0}, {1, 2, 1.0}});
  EXPECT_DOUBLE_EQ(turbo_mq(w, p), 1.6);
  EXPECT_DOUBLE_EQ(turbo_mq(w, Partition({0, 0, 0, 0})), 1.0);
}

TEST(QualityMetrics, Entries) {
  // Module {A, B} with A -> B and outside caller C -> A.
  const auto g = unit_edges(3, {{0, 1}, {2, 0}});
  EXPECT_EQ(module_entries(g, Partition({0, 0, 1})), (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(module_entries(unit_edges(1, {}), Partition({0})), (std::vector<std::size_t>{1}));
  EXPECT_EQ(module_entries(unit_edges(2, {{0, 1}, {1, 0}}), Partition({0, 0})), (std::vector<std::size_t>{0}));
  // A self-call does not make a function its own internal caller.
  EXPECT_EQ(module_entries(unit_edges(2, {{0, 0}, {0, 1}}), Partition({0, 0})), (std::vector<std::size_t>{1}));
}

TEST(QualityMetrics, IsolatedClusters) {
  const auto g = unit_edges(4, {{0, 1}});
  EXPECT_EQ(isolated_clusters(g, Partition({0, 0, 1, 1})), (std::vector<std::size_t>{1, 2}));
  const auto report = evaluate_quality(g, Partition({0, 0, 1, 2}));
  EXPECT_DOUBLE_EQ(report.avg_isolated_clusters, 1.0);
}

TEST(QualityMetrics, Overlap) {
  EXPECT_DOUBLE_EQ(overlap_score(Partition({0, 0, 0}), Partition({0, 1, 1})), 2.0);
  EXPECT_DOUBLE_EQ(overlap_score(Partition::singletons(4), Partition({0, 0, 1, 1})), 1.0);
  gen::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = gen::random_partition(12, 5, rng);
    EXPECT_DOUBLE_EQ(overlap_score(p, p), 1.0);
  }
}

TEST(QualityMetrics, MatchesBruteForce) {
  gen::Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pg = gen::random_graph({.nodes = 1 + rng.below(8), .edge_p = 0.35, .self_p = 0.15}, rng);
    const auto w = propagate_volumes(pg);
    const auto unit = WeightedGraph::unit(pg);
    const auto p = gen::random_partition(pg.size(), 4, rng);
    EXPECT_NEAR(origin_mq(w, p), oracle::origin_mq(w, p), 1e-12);
    EXPECT_NEAR(weighted_directed_mq(w, p), oracle::directed_mq(w, p, false), 1e-12);
    EXPECT_NEAR(weighted_directed_mq(w, p, MqNormalization::kPerW), oracle::directed_mq(w, p, false, false), 1e-12);
    EXPECT_NEAR(directed_mq(w, p), oracle::directed_mq(unit, p, true), 1e-12);
    EXPECT_NEAR(bunch_mq(w, p), oracle::cluster_factor_mq(w, p, true), 1e-12);
    EXPECT_NEAR(turbo_mq(w, p), oracle::cluster_factor_mq(w, p, false), 1e-12);
    EXPECT_LE(std::abs(origin_mq(w, p)), 1.0);
    EXPECT_LE(std::abs(weighted_directed_mq(w, p)), 1.0);
  }
}

TEST(QualityMetrics, LabelPermutationInvariance) {
  gen::Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pg = gen::random_graph({.nodes = 10, .edge_p = 0.3}, rng);
    const auto w = propagate_volumes(pg);
    const auto p = gen::random_partition(pg.size(), 4, rng);
    std::vector<Partition::ModuleId> shifted;
    for (auto l : p.labels()) shifted.push_back(static_cast<Partition::ModuleId>(p.module_count() - 1 - l));
    const auto q = Partition::from_dense(shifted, p.module_count());
    const auto a = evaluate_quality(w, p);
    const auto b = evaluate_quality(w, q);
    EXPECT_NEAR(a.origin_mq, b.origin_mq, 1e-12);
    EXPECT_NEAR(a.weighted_directed_mq, b.weighted_directed_mq, 1e-12);
    EXPECT_NEAR(a.directed_mq, b.directed_mq, 1e-12);
    EXPECT_NEAR(a.bunch_mq, b.bunch_mq, 1e-12);
    EXPECT_NEAR(a.turbo_mq, b.turbo_mq, 1e-12);
    EXPECT_DOUBLE_EQ(a.avg_entries, b.avg_entries);
    EXPECT_DOUBLE_EQ(a.avg_isolated_clusters, b.avg_isolated_clusters);
  }
}

TEST(QualityMetrics, ReportRendering) {
  const auto g = unit_edges(2, {{0, 1}});
  const auto r = evaluate_quality(g, Partition({0, 0}));
  EXPECT_NE(quality_report_text(r).find("weighted_directed_mq"), std::string::npos);
  EXPECT_NE(quality_report_json(r).find("\"bunch_mq\""), std::string::npos);
}

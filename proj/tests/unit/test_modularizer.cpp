#include <gtest/gtest.h>

#include <set>

#include "generators.hpp"
#include "modx/modularizer.hpp"
#include "oracles.hpp"

using namespace modx;

namespace {

Partition merged(const Partition& p, Partition::ModuleId r, Partition::ModuleId s) {
  std::vector<Partition::ModuleId> labels = p.labels();
  for (auto& l : labels) {
    if (l == s) l = r;
  }
  return Partition(labels);
}

// Replays a merge trace from singletons.
std::vector<Partition> replay(std::size_t n, const std::vector<MergeRecord>& merges) {
  std::vector<Partition::ModuleId> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Partition::ModuleId>(i);
  std::vector<Partition> states{Partition(labels)};
  for (const auto& m : merges) {
    const auto from = labels[m.second];
    const auto to = labels[m.first];
    for (auto& l : labels) {
      if (l == from) l = to;
    }
    states.emplace_back(labels);
  }
  return states;
}

}  // namespace

TEST(Modularizer, EmptyAndSingleNode) {
  EXPECT_EQ(modularize(WeightedGraph::from_edges(0, {})).size(), 0u);
  const auto p = modularize(WeightedGraph::from_edges(1, {}));
  EXPECT_EQ(p.module_count(), 1u);
}

TEST(Modularizer, CliquePairRecovered) {
  const auto g = synthetic::clique_pair();
  ModularizerConfig cfg;
  cfg.locality_bias = cfg.entry_bias = false;
  const auto p = modularize(WeightedGraph::unit(g), cfg);
  EXPECT_EQ(p.labels(), (std::vector<Partition::ModuleId>{0, 0, 0, 1, 1, 1}));
  // With the default divisor DS_max = 6/100 rules out every merge.
  EXPECT_EQ(modularize(propagate_volumes(g)).module_count(), 6u);
  ModularizerConfig biased;
  biased.ds_limit_divisor = 1;
  EXPECT_EQ(modularize(propagate_volumes(g), biased).labels(), p.labels());
}

TEST(Modularizer, DeltaQSingleEdge) {
  const auto g = WeightedGraph::from_edges(2, {{0, 1, 4.0}});
  const auto p = Partition::singletons(2);
  EXPECT_DOUBLE_EQ(delta_q(g, p, 0, 1), 0.25);
  EXPECT_DOUBLE_EQ(delta_q(g, p, 1, 0), 0.25);
}

TEST(Modularizer, DeltaQWithoutEdgeIsNonPositive) {
  const auto g = WeightedGraph::from_edges(4, {{0, 1, 2.0}, {2, 3, 5.0}, {3, 0, 1.0}});
  const auto p = Partition::singletons(4);
  EXPECT_LE(delta_q(g, p, 1, 2), 0.0);
  EXPECT_DOUBLE_EQ(delta_q(g, p, 1, 2), delta_q(g, p, 2, 1));
}

TEST(Modularizer, DeltaQMatchesRecompute) {
  gen::Rng rng(21);
  for (auto norm : {MqNormalization::kLiteral2W, MqNormalization::kPerW}) {
    for (int trial = 0; trial < 40; ++trial) {
      const auto pg = gen::random_graph({.nodes = 2 + rng.below(25), .edge_p = 0.2, .self_p = 0.1}, rng);
      const auto w = propagate_volumes(pg);
      const auto p = gen::random_partition(pg.size(), 6, rng);
      if (p.module_count() < 2) continue;
      const auto r = static_cast<Partition::ModuleId>(rng.below(p.module_count()));
      auto s = static_cast<Partition::ModuleId>(rng.below(p.module_count() - 1));
      if (s >= r) ++s;
      const double expected = oracle::directed_mq(w, merged(p, r, s), false, norm == MqNormalization::kLiteral2W) -
                              oracle::directed_mq(w, p, false, norm == MqNormalization::kLiteral2W);
      EXPECT_NEAR(delta_q(w, p, r, s, norm), expected, 1e-12);
    }
  }
}

TEST(Modularizer, LocalityBias) {
  ModularizerConfig cfg;
  EXPECT_DOUBLE_EQ(locality_bias(1.0, 1000, cfg), 2.7);
  EXPECT_DOUBLE_EQ(locality_bias(0.0, 1000, cfg), 3.0);
  EXPECT_DOUBLE_EQ(locality_bias(10.5, 1000, cfg), 0.0);

  const auto g = WeightedGraph::from_edges(1000, {});
  const ModuleState r({5}, g, 1), s({6}, g, 1);
  EXPECT_DOUBLE_EQ(ModuleState::merged_dispersion(r, s), 1.0);
  EXPECT_DOUBLE_EQ(locality_bias(r, s, 1000, cfg), 2.7);
}

TEST(Modularizer, EntryBias) {
  EXPECT_EQ(entry_bias(1, 1, 1), 1.0);
  EXPECT_EQ(entry_bias(1, 1, 2), 0.5);
  EXPECT_EQ(entry_bias(1, 1, 0), 2.0);
  // A -> B: merging keeps one entry from two.
  const auto g = WeightedGraph::from_edges(2, {{0, 1, 1.0}});
  EXPECT_DOUBLE_EQ(entry_bias(g, Partition::singletons(2), 0, 1), 1.0);
}

TEST(Modularizer, ModuleStateBookkeeping) {
  const auto g = WeightedGraph::from_edges(10, {});
  const ModuleState m({2, 3, 7}, g, 0);
  EXPECT_DOUBLE_EQ(m.avg_ordinal(), 4.0);
  EXPECT_DOUBLE_EQ(m.dispersion(), 2.0 + 1.0 + 3.0);
  const auto both = ModuleState::merged(m, ModuleState({9}, g, 1), 1);
  EXPECT_DOUBLE_EQ(both.avg_ordinal(), 5.25);
  EXPECT_DOUBLE_EQ(both.dispersion(), 3.25 + 2.25 + 1.75 + 3.75);
  EXPECT_EQ(both.min_ordinal(), 2u);
}

TEST(Modularizer, UnbiasedObjectiveIsMonotone) {
  gen::Rng rng(22);
  ModularizerConfig cfg;
  cfg.locality_bias = cfg.entry_bias = false;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pg = gen::random_graph({.nodes = 5 + rng.below(40), .edge_p = 0.08}, rng);
    const auto w = propagate_volumes(pg);
    const auto result = modularize_with_trace(w, cfg);
    const auto states = replay(pg.size(), result.merges);
    for (std::size_t k = 1; k < states.size(); ++k) {
      const double before = weighted_directed_mq(w, states[k - 1]);
      const double after = weighted_directed_mq(w, states[k]);
      EXPECT_GE(after, before - 1e-12);
      EXPECT_NEAR(after - before, result.merges[k - 1].base_gain, 1e-9);
    }
    EXPECT_EQ(states.back(), result.partition);
  }
}

TEST(Modularizer, BiasedMergesKeepPositiveBaseGain) {
  gen::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pg = gen::random_graph({.nodes = 5 + rng.below(60), .edge_p = 0.06}, rng);
    ModularizerConfig cfg;
    cfg.ds_limit_divisor = 1;
    const auto result = modularize_with_trace(propagate_volumes(pg), cfg);
    for (const auto& m : result.merges) {
      EXPECT_GT(m.gain, cfg.epsilon);
      EXPECT_GT(m.base_gain, 0.0);
      EXPECT_DOUBLE_EQ(m.gain, m.base_gain * m.locality * m.entry);
    }
  }
}

TEST(Modularizer, ModulesAreWeaklyConnectedAndDeterministic) {
  gen::Rng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pg = gen::random_graph({.nodes = 10 + rng.below(80), .edge_p = 0.04}, rng);
    const auto w = propagate_volumes(pg);
    ModularizerConfig cfg;
    cfg.ds_limit_divisor = 1 + rng.below(10);
    const auto p = modularize(w, cfg);
    EXPECT_EQ(p.size(), pg.size());
    for (auto c : isolated_clusters(w, p)) EXPECT_EQ(c, 1u);
    EXPECT_EQ(modularize(w, cfg), p);
    // Output modules are numbered by ascending smallest ordinal.
    std::vector<std::size_t> first;
    for (const auto& members : p.members()) first.push_back(w.ordinal[members.front()]);
    EXPECT_TRUE(std::is_sorted(first.begin(), first.end()));
  }
}

TEST(Modularizer, MaxPassesBoundsMerges) {
  const auto g = propagate_volumes(synthetic::clique_pair());
  ModularizerConfig cfg;
  cfg.ds_limit_divisor = 1;
  cfg.max_passes = 1;
  EXPECT_EQ(modularize_with_trace(g, cfg).merges.size(), 1u);
  EXPECT_EQ(modularize(g, cfg).module_count(), 5u);
}

TEST(Modularizer, ConfigValidation) {
  ModularizerConfig cfg;
  cfg.ds_limit_divisor = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.bias_cap = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epsilon = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

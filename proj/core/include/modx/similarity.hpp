#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "modx/module_features.hpp"

namespace modx {

enum class Channel { kStrings = 0, kConstants, kKernel, kEdges, kFunctions };
inline constexpr std::size_t kChannelCount = 5;
std::string_view to_string(Channel channel);

struct ChannelWeights {
  double strings = 0.30;
  double constants = 0.15;
  double kernel = 0.20;
  double edges = 0.10;
  double functions = 0.25;

  double of(Channel channel) const;
  void validate() const;
};

struct SimilarityBreakdown {
  std::array<std::optional<double>, kChannelCount> channel{};  // nullopt = inactive
  double aggregate = 0.0;

  std::optional<double> score(Channel c) const { return channel[static_cast<std::size_t>(c)]; }
  bool active(Channel c) const { return score(c).has_value(); }
};

// Cosine of two non-negative vectors, clamped to [0, 1]; 0 when either is zero.
double cosine(std::span<const double> a, std::span<const double> b);

// Jaccard index; nullopt when either set is empty.
std::optional<double> string_similarity(const std::set<std::string>& a, const std::set<std::string>& b);

// Cosine of sparse TF-IDF vectors; nullopt when either is zero.
std::optional<double> constant_similarity(const SparseVector& a, const SparseVector& b);

// Normalised propagation-kernel value k(a,b) / sqrt(k(a,a) k(b,b)).
double kernel_similarity(const std::vector<KernelHistogram>& a, const std::vector<KernelHistogram>& b);

// Greedy best-match over edge vectors; nullopt when either list is empty.
std::optional<double> edge_similarity(const std::vector<EdgeVector>& a, const std::vector<EdgeVector>& b);

// Anchor-guided drill-down pairing, volume-weighted.
double function_similarity(const ModuleSignature& a, const ModuleSignature& b);

// Weighted mean over the active channels. Symmetric in (a, b).
SimilarityBreakdown aggregate(const ModuleSignature& a, const ModuleSignature& b, const CorpusStats& stats,
                              const ChannelWeights& weights = {});

}  // namespace modx

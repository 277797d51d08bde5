#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "modx/graph_model.hpp"

namespace modx {

inline constexpr std::size_t kFunctionDims = 8;
inline constexpr std::size_t kEdgeDims = 2 * kFunctionDims;

using FunctionVector = std::array<double, kFunctionDims>;
using EdgeVector = std::array<double, kEdgeDims>;
using KernelHistogram = std::map<std::uint64_t, std::uint32_t>;  // bin -> node count
using ConstantBag = std::map<std::int64_t, std::uint32_t>;
using SparseVector = std::map<std::int64_t, double>;

struct FeatureConfig {
  std::size_t min_string_len = 5;
  std::size_t kernel_iterations = 3;
  double kernel_bin_width = 0.1;

  void validate() const;
};

// Maps a function to a fixed-length vector. The default is a statistical
// embedding of size/shape counters; a learned CFG embedder can replace it.
class FunctionEmbedder {
 public:
  virtual ~FunctionEmbedder() = default;
  virtual FunctionVector embed(const ProgramGraph& graph, std::size_t fn) const = 0;
};

class StatisticalEmbedder final : public FunctionEmbedder {
 public:
  FunctionVector embed(const ProgramGraph& graph, std::size_t fn) const override;
};

// L2-normalised log counters: volume, basic blocks, CFG edges, in-degree,
// out-degree, strings, constants, data refs.
FunctionVector function_vector(const ProgramGraph& graph, std::size_t fn);

enum class AnchorKind { kSharedData, kDispatch };

struct FunctionFeature {
  std::string id;
  std::uint64_t volume = 1;
  FunctionVector vector{};

  bool operator==(const FunctionFeature&) const = default;
};

struct AnchorGroup {
  AnchorKind kind = AnchorKind::kSharedData;
  // Indices into ModuleSignature::functions, by descending volume.
  std::vector<std::size_t> members;

  bool operator==(const AnchorGroup&) const = default;
};

struct ModuleSignature {
  std::uint32_t module_id = 0;
  std::size_t function_count = 0;
  std::set<std::string> string_set;
  ConstantBag constant_bag;
  std::vector<KernelHistogram> kernel_histograms;  // t = 0..T
  std::vector<EdgeVector> edge_vectors;
  std::vector<FunctionFeature> functions;          // ascending ordinal
  std::vector<AnchorGroup> anchor_groups;

  bool operator==(const ModuleSignature&) const = default;
};

// Document-frequency table over a set of module signatures.
struct CorpusStats {
  std::size_t module_count = 0;
  std::map<std::int64_t, std::size_t> document_frequency;

  static CorpusStats from_modules(const std::vector<const ModuleSignature*>& modules);
  bool operator==(const CorpusStats&) const = default;
};

// Induced subgraph of one module, in local indices.
struct ModuleSubgraph {
  std::vector<std::size_t> functions;  // global indices, ascending ordinal
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // local (caller, callee), self-calls dropped
};

ModuleSubgraph module_subgraph(const ProgramGraph& graph, const std::vector<std::size_t>& members);

std::vector<KernelHistogram> kernel_signature(const ModuleSubgraph& sub, const std::vector<FunctionVector>& vectors,
                                              const FeatureConfig& config);

std::vector<EdgeVector> edge_vectors(const ModuleSubgraph& sub, const std::vector<FunctionVector>& vectors);

std::vector<AnchorGroup> anchor_groups(const ProgramGraph& graph, const ModuleSubgraph& sub);

// tf(c) * ln(N_mod / (1 + df(c))), clamped at 0. Zero weights are omitted.
SparseVector tfidf_vector(const ConstantBag& bag, const CorpusStats& stats);

ModuleSignature extract_signature(const ProgramGraph& graph, const Partition& partition,
                                  Partition::ModuleId module, const FeatureConfig& config = {},
                                  const FunctionEmbedder& embedder = StatisticalEmbedder());

std::vector<ModuleSignature> extract_all_signatures(const ProgramGraph& graph, const Partition& partition,
                                                    const FeatureConfig& config = {});

}  // namespace modx

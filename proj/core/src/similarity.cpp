#include "modx/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <tuple>

namespace modx {

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kStrings: return "strings";
    case Channel::kConstants: return "constants";
    case Channel::kKernel: return "kernel";
    case Channel::kEdges: return "edges";
    case Channel::kFunctions: return "functions";
  }
  return "unknown";
}

double ChannelWeights::of(Channel channel) const {
  switch (channel) {
    case Channel::kStrings: return strings;
    case Channel::kConstants: return constants;
    case Channel::kKernel: return kernel;
    case Channel::kEdges: return edges;
    case Channel::kFunctions: return functions;
  }
  return 0.0;
}

void ChannelWeights::validate() const {
  for (double w : {strings, constants, kernel, edges, functions}) {
    if (!(w >= 0.0)) throw std::invalid_argument("channel weights must be non-negative");
  }
  if (std::abs(strings + constants + kernel + edges + functions - 1.0) > 1e-9) {
    throw std::invalid_argument("channel weights must sum to 1");
  }
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) dot += a[i] * b[i];
  for (double x : a) na += x * x;
  for (double x : b) nb += x * x;
  if (na == 0.0 || nb == 0.0) return 0.0;
  // sqrt(na * nb) is exactly na when na == nb, which keeps self-cosine at 1.
  return clamp01(dot / std::sqrt(na * nb));
}

std::optional<double> string_similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t unite = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(unite);
}

std::optional<double> constant_similarity(const SparseVector& a, const SparseVector& b) {
  double na = 0.0, nb = 0.0, dot = 0.0;
  for (const auto& [k, v] : a) na += v * v;
  for (const auto& [k, v] : b) nb += v * v;
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return clamp01(dot / std::sqrt(na * nb));
}

namespace {

std::uint64_t kernel_value(const std::vector<KernelHistogram>& a, const std::vector<KernelHistogram>& b) {
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < a.size() && t < b.size(); ++t) {
    const auto& small = a[t].size() <= b[t].size() ? a[t] : b[t];
    const auto& large = a[t].size() <= b[t].size() ? b[t] : a[t];
    for (const auto& [bin, count] : small) {
      auto it = large.find(bin);
      if (it != large.end()) total += static_cast<std::uint64_t>(count) * it->second;
    }
  }
  return total;
}

struct Pair {
  double cos;
  std::size_t left;
  std::size_t right;
};

using VectorAt = std::function<std::span<const double>(std::size_t)>;

// All-pairs greedy assignment by descending cosine, ties by index order.
std::vector<Pair> greedy_pairs(const std::vector<std::size_t>& left, const std::vector<std::size_t>& right,
                               const VectorAt& left_vec, const VectorAt& right_vec) {
  if (left.empty() || right.empty()) return {};
  std::vector<Pair> all;
  all.reserve(left.size() * right.size());
  for (std::size_t i : left) {
    for (std::size_t j : right) all.push_back({cosine(left_vec(i), right_vec(j)), i, j});
  }
  std::sort(all.begin(), all.end(), [](const Pair& x, const Pair& y) {
    return std::tie(y.cos, x.left, x.right) < std::tie(x.cos, y.left, y.right);
  });
  std::vector<bool> used_left(*std::max_element(left.begin(), left.end()) + 1, false);
  std::vector<bool> used_right(*std::max_element(right.begin(), right.end()) + 1, false);
  std::vector<Pair> chosen;
  const std::size_t limit = std::min(left.size(), right.size());
  for (const Pair& p : all) {
    if (chosen.size() == limit) break;
    if (used_left[p.left] || used_right[p.right]) continue;
    used_left[p.left] = used_right[p.right] = true;
    chosen.push_back(p);
  }
  return chosen;
}

bool function_side_before(const ModuleSignature& a, const ModuleSignature& b) {
  auto key = [](const ModuleSignature& s) {
    std::vector<std::tuple<std::uint64_t, FunctionVector>> fns;
    for (const auto& f : s.functions) fns.emplace_back(f.volume, f.vector);
    std::vector<std::tuple<int, std::vector<std::size_t>>> groups;
    for (const auto& g : s.anchor_groups) groups.emplace_back(static_cast<int>(g.kind), g.members);
    return std::make_tuple(fns, groups);
  };
  return key(a) < key(b);
}

}  // namespace

double kernel_similarity(const std::vector<KernelHistogram>& a, const std::vector<KernelHistogram>& b) {
  const auto kaa = kernel_value(a, a);
  const auto kbb = kernel_value(b, b);
  if (kaa == 0 || kbb == 0) return 0.0;
  const double kab = static_cast<double>(kernel_value(a, b));
  return clamp01(kab / std::sqrt(static_cast<double>(kaa) * static_cast<double>(kbb)));
}

std::optional<double> edge_similarity(const std::vector<EdgeVector>& a_in, const std::vector<EdgeVector>& b_in) {
  if (a_in.empty() || b_in.empty()) return std::nullopt;
  const bool swap = b_in < a_in;
  const auto& a = swap ? b_in : a_in;
  const auto& b = swap ? a_in : b_in;
  std::vector<std::size_t> left(a.size()), right(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) left[i] = i;
  for (std::size_t j = 0; j < b.size(); ++j) right[j] = j;
  const VectorAt va = [&](std::size_t i) { return std::span<const double>(a[i]); };
  const VectorAt vb = [&](std::size_t j) { return std::span<const double>(b[j]); };
  const auto pairs = greedy_pairs(left, right, va, vb);
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.cos;
  const double mean = sum / static_cast<double>(pairs.size());
  const double coverage = static_cast<double>(pairs.size()) / static_cast<double>(std::max(a.size(), b.size()));
  return clamp01(mean * coverage);
}

double function_similarity(const ModuleSignature& a_in, const ModuleSignature& b_in) {
  const bool swap = function_side_before(b_in, a_in);
  const ModuleSignature& a = swap ? b_in : a_in;
  const ModuleSignature& b = swap ? a_in : b_in;
  if (a.functions.empty() && b.functions.empty()) return 0.0;

  const VectorAt va = [&](std::size_t i) {
    return std::span<const double>(a.functions[i].vector);
  };
  const VectorAt vb = [&](std::size_t j) {
    return std::span<const double>(b.functions[j].vector);
  };

  std::vector<bool> paired_a(a.functions.size(), false), paired_b(b.functions.size(), false);
  std::vector<Pair> pairs;
  auto take = [&](const std::vector<std::size_t>& left, const std::vector<std::size_t>& right) {
    std::vector<std::size_t> l, r;
    for (std::size_t i : left) {
      if (!paired_a[i]) l.push_back(i);
    }
    for (std::size_t j : right) {
      if (!paired_b[j]) r.push_back(j);
    }
    for (const Pair& p : greedy_pairs(l, r, va, vb)) {
      paired_a[p.left] = paired_b[p.right] = true;
      pairs.push_back(p);
    }
  };

  // Drill down through anchor groups of matching kind, largest first.
  for (AnchorKind kind : {AnchorKind::kSharedData, AnchorKind::kDispatch}) {
    auto groups_of = [kind](const ModuleSignature& s) {
      std::vector<const AnchorGroup*> out;
      for (const auto& g : s.anchor_groups) {
        if (g.kind == kind) out.push_back(&g);
      }
      std::stable_sort(out.begin(), out.end(),
                       [](const AnchorGroup* x, const AnchorGroup* y) { return x->members.size() > y->members.size(); });
      return out;
    };
    const auto ga = groups_of(a);
    const auto gb = groups_of(b);
    for (std::size_t k = 0; k < ga.size() && k < gb.size(); ++k) take(ga[k]->members, gb[k]->members);
  }

  std::vector<std::size_t> pool_a, pool_b;
  for (std::size_t i = 0; i < a.functions.size(); ++i) pool_a.push_back(i);
  for (std::size_t j = 0; j < b.functions.size(); ++j) pool_b.push_back(j);
  take(pool_a, pool_b);

  double numerator = 0.0, denominator = 0.0;
  for (const Pair& p : pairs) {
    const double w = 0.5 * static_cast<double>(a.functions[p.left].volume + b.functions[p.right].volume);
    numerator += w * p.cos;
    denominator += w;
  }
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    if (!paired_a[i]) denominator += static_cast<double>(a.functions[i].volume);
  }
  for (std::size_t j = 0; j < b.functions.size(); ++j) {
    if (!paired_b[j]) denominator += static_cast<double>(b.functions[j].volume);
  }
  return denominator > 0.0 ? clamp01(numerator / denominator) : 0.0;
}

SimilarityBreakdown aggregate(const ModuleSignature& a, const ModuleSignature& b, const CorpusStats& stats,
                              const ChannelWeights& weights) {
  SimilarityBreakdown out;
  out.channel[static_cast<std::size_t>(Channel::kStrings)] = string_similarity(a.string_set, b.string_set);
  out.channel[static_cast<std::size_t>(Channel::kConstants)] =
      constant_similarity(tfidf_vector(a.constant_bag, stats), tfidf_vector(b.constant_bag, stats));
  out.channel[static_cast<std::size_t>(Channel::kKernel)] = kernel_similarity(a.kernel_histograms, b.kernel_histograms);
  out.channel[static_cast<std::size_t>(Channel::kEdges)] = edge_similarity(a.edge_vectors, b.edge_vectors);
  out.channel[static_cast<std::size_t>(Channel::kFunctions)] = function_similarity(a, b);

  double numerator = 0.0, denominator = 0.0;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (!out.channel[c]) continue;
    const double w = weights.of(static_cast<Channel>(c));
    numerator += w * *out.channel[c];
    denominator += w;
  }
  out.aggregate = denominator > 0.0 ? clamp01(numerator / denominator) : 0.0;
  return out;
}

}  // namespace modx

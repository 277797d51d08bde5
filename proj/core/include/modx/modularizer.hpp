#pragma once

#include <cstddef>
#include <vector>

#include "modx/graph_model.hpp"
#include "modx/quality_metrics.hpp"
#include "modx/volume_weighting.hpp"

namespace modx {

struct ModularizerConfig {
  std::size_t ds_limit_divisor = 100;  // DS_max = N / ds_limit_divisor
  double bias_cap = 3.0;               // locality bias ranges over [0, bias_cap]
  std::size_t max_passes = 0;          // maximum accepted merges, 0 = unbounded
  double epsilon = 1e-12;              // minimum accepted (biased) delta Q
  bool locality_bias = true;
  bool entry_bias = true;
  MqNormalization normalization = MqNormalization::kLiteral2W;

  void validate() const;
};

// Aggregate view of one module during agglomeration.
class ModuleState {
 public:
  ModuleState() = default;
  ModuleState(std::vector<std::size_t> members, const WeightedGraph& graph, std::size_t entry_count);

  static ModuleState merged(const ModuleState& r, const ModuleState& s, std::size_t entry_count);

  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  double avg_ordinal() const { return avg_ordinal_; }
  double dispersion() const { return dispersion_; }
  std::size_t entry_count() const { return entry_count_; }
  std::size_t min_ordinal() const { return ordinals_.empty() ? 0 : ordinals_.front(); }
  double k_out() const { return k_out_; }
  double k_in() const { return k_in_; }

  // Dispersion of r ∪ s around their joint mean ordinal.
  static double merged_dispersion(const ModuleState& r, const ModuleState& s);

 private:
  void finish();
  // Sum of |o - centre| over this module's ordinals.
  double spread_around(double centre) const;

  std::vector<std::size_t> members_;
  std::vector<std::size_t> ordinals_;  // sorted
  std::vector<double> prefix_;         // prefix sums of ordinals_
  double avg_ordinal_ = 0.0;
  double dispersion_ = 0.0;
  std::size_t entry_count_ = 0;
  double k_out_ = 0.0;
  double k_in_ = 0.0;
};

// Unbiased merge gain: e-terms from the edge weight between r and s minus the
// directed null-model cross terms. `w_rs` is the weight on edges r -> s.
double delta_q(const ModuleState& r, const ModuleState& s, double w_rs, double w_sr, double total_weight,
               MqNormalization norm = MqNormalization::kLiteral2W);

// Recomputes the cross weights from scratch for modules r and s of `partition`.
double delta_q(const WeightedGraph& graph, const Partition& partition, Partition::ModuleId r,
               Partition::ModuleId s, MqNormalization norm = MqNormalization::kLiteral2W);

double locality_bias(double merged_dispersion, std::size_t total_functions, const ModularizerConfig& config);
double locality_bias(const ModuleState& r, const ModuleState& s, std::size_t total_functions,
                     const ModularizerConfig& config);

// 2^-(EQ_merged - (EQ_r + EQ_s) / 2)
double entry_bias(double eq_r, double eq_s, double eq_merged);
double entry_bias(const WeightedGraph& graph, const Partition& partition, Partition::ModuleId r,
                  Partition::ModuleId s);

struct MergeRecord {
  std::size_t first;   // surviving module (index of its smallest member)
  std::size_t second;  // absorbed module (index of its smallest member)
  double base_gain;    // unbiased delta Q
  double locality;
  double entry;
  double gain;         // base_gain * locality * entry
};

struct ModularizeResult {
  Partition partition;
  std::vector<MergeRecord> merges;
};

// Greedy agglomeration: start from singletons, repeatedly merge the connected
// pair with the largest biased gain until no gain exceeds epsilon. Modules in
// the output are numbered by ascending smallest ordinal.
ModularizeResult modularize_with_trace(const WeightedGraph& graph, const ModularizerConfig& config = {});
Partition modularize(const WeightedGraph& graph, const ModularizerConfig& config = {});

}  // namespace modx

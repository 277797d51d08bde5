#include "modx/modularizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace modx {

void ModularizerConfig::validate() const {
  if (ds_limit_divisor == 0) throw std::invalid_argument("ds_limit_divisor must be positive");
  if (!(bias_cap > 0.0)) throw std::invalid_argument("bias_cap must be > 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
}

// ---------------------------------------------------------------------------

ModuleState::ModuleState(std::vector<std::size_t> members, const WeightedGraph& graph, std::size_t entry_count)
    : members_(std::move(members)), entry_count_(entry_count) {
  std::sort(members_.begin(), members_.end());
  for (std::size_t fn : members_) {
    ordinals_.push_back(graph.ordinal[fn]);
    k_out_ += graph.k_out[fn];
    k_in_ += graph.k_in[fn];
  }
  std::sort(ordinals_.begin(), ordinals_.end());
  finish();
}

ModuleState ModuleState::merged(const ModuleState& r, const ModuleState& s, std::size_t entry_count) {
  ModuleState m;
  m.members_.reserve(r.size() + s.size());
  std::merge(r.members_.begin(), r.members_.end(), s.members_.begin(), s.members_.end(),
             std::back_inserter(m.members_));
  m.ordinals_.reserve(r.size() + s.size());
  std::merge(r.ordinals_.begin(), r.ordinals_.end(), s.ordinals_.begin(), s.ordinals_.end(),
             std::back_inserter(m.ordinals_));
  m.k_out_ = r.k_out_ + s.k_out_;
  m.k_in_ = r.k_in_ + s.k_in_;
  m.entry_count_ = entry_count;
  m.finish();
  return m;
}

void ModuleState::finish() {
  prefix_.assign(ordinals_.size() + 1, 0.0);
  for (std::size_t i = 0; i < ordinals_.size(); ++i) {
    prefix_[i + 1] = prefix_[i] + static_cast<double>(ordinals_[i]);
  }
  avg_ordinal_ = ordinals_.empty() ? 0.0 : prefix_.back() / static_cast<double>(ordinals_.size());
  dispersion_ = spread_around(avg_ordinal_);
}

double ModuleState::spread_around(double centre) const {
  const auto split = std::upper_bound(ordinals_.begin(), ordinals_.end(), centre,
                                      [](double c, std::size_t o) { return c < static_cast<double>(o); });
  const auto below = static_cast<std::size_t>(split - ordinals_.begin());
  const auto above = ordinals_.size() - below;
  const double sum_below = prefix_[below];
  const double sum_above = prefix_.back() - sum_below;
  return (centre * static_cast<double>(below) - sum_below) + (sum_above - centre * static_cast<double>(above));
}

double ModuleState::merged_dispersion(const ModuleState& r, const ModuleState& s) {
  const double count = static_cast<double>(r.size() + s.size());
  if (count == 0.0) return 0.0;
  const double centre = (r.prefix_.back() + s.prefix_.back()) / count;
  return r.spread_around(centre) + s.spread_around(centre);
}

// ---------------------------------------------------------------------------

double delta_q(const ModuleState& r, const ModuleState& s, double w_rs, double w_sr, double total_weight,
               MqNormalization norm) {
  if (total_weight <= 0.0) return 0.0;
  const double denom = norm == MqNormalization::kLiteral2W ? 2.0 * total_weight : total_weight;
  // e^out_{r,s} counts r -> s weight, e^in_{r,s} counts s -> r weight.
  const double e_out_rs = w_rs / (2.0 * denom);
  const double e_in_rs = w_sr / (2.0 * denom);
  const double e_out_sr = w_sr / (2.0 * denom);
  const double e_in_sr = w_rs / (2.0 * denom);
  const double a_out_r = r.k_out() / denom, a_in_r = r.k_in() / denom;
  const double a_out_s = s.k_out() / denom, a_in_s = s.k_in() / denom;
  return e_in_rs + e_out_rs + e_in_sr + e_out_sr - (a_out_r * a_in_s + a_in_r * a_out_s);
}

namespace {

std::vector<std::size_t> members_of(const Partition& partition, Partition::ModuleId m) {
  std::vector<std::size_t> out;
  for (std::size_t fn = 0; fn < partition.size(); ++fn) {
    if (partition.module_of(fn) == m) out.push_back(fn);
  }
  return out;
}

Partition merge_labels(const Partition& partition, Partition::ModuleId r, Partition::ModuleId s) {
  auto labels = partition.labels();
  for (auto& label : labels) {
    if (label == s) label = r;
  }
  return Partition(std::move(labels));
}

}  // namespace

double delta_q(const WeightedGraph& graph, const Partition& partition, Partition::ModuleId r,
               Partition::ModuleId s, MqNormalization norm) {
  if (r == s) throw std::invalid_argument("delta_q requires two distinct modules");
  double w_rs = 0.0, w_sr = 0.0;
  for (const auto& e : graph.edges) {
    const auto cs = partition.module_of(e.src), cd = partition.module_of(e.dst);
    if (cs == r && cd == s) w_rs += e.weight;
    if (cs == s && cd == r) w_sr += e.weight;
  }
  const ModuleState rs(members_of(partition, r), graph, 0);
  const ModuleState ss(members_of(partition, s), graph, 0);
  return delta_q(rs, ss, w_rs, w_sr, graph.total_weight, norm);
}

double locality_bias(double merged_dispersion, std::size_t total_functions, const ModularizerConfig& config) {
  const double limit = static_cast<double>(total_functions) / static_cast<double>(config.ds_limit_divisor);
  if (merged_dispersion > limit) return 0.0;
  if (limit <= 0.0) return config.bias_cap;
  return config.bias_cap * (1.0 - merged_dispersion / limit);
}

double locality_bias(const ModuleState& r, const ModuleState& s, std::size_t total_functions,
                     const ModularizerConfig& config) {
  return locality_bias(ModuleState::merged_dispersion(r, s), total_functions, config);
}

double entry_bias(double eq_r, double eq_s, double eq_merged) {
  return std::exp2(-(eq_merged - (eq_r + eq_s) / 2.0));
}

double entry_bias(const WeightedGraph& graph, const Partition& partition, Partition::ModuleId r,
                  Partition::ModuleId s) {
  const auto before = module_entries(graph, partition);
  const Partition after = merge_labels(partition, r, s);
  const auto merged = module_entries(graph, after);
  return entry_bias(static_cast<double>(before[r]), static_cast<double>(before[s]),
                    static_cast<double>(merged[after.module_of(members_of(partition, r).front())]));
}

// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  double gain;
  std::size_t key_lo, key_hi;  // min ordinals of the two modules, ascending
  std::size_t a, b;
  std::size_t version_a, version_b;
  double base_gain, locality, entry;
};

struct CandidateOrder {
  bool operator()(const Candidate& x, const Candidate& y) const {
    if (x.gain != y.gain) return x.gain < y.gain;
    if (x.key_lo != y.key_lo) return x.key_lo > y.key_lo;
    return x.key_hi > y.key_hi;
  }
};

struct CrossWeight {
  double out = 0.0;  // this module -> neighbour
  double in = 0.0;   // neighbour -> this module
};

class Agglomerator {
 public:
  Agglomerator(const WeightedGraph& graph, const ModularizerConfig& config)
      : graph_(graph), config_(config), n_(graph.size()) {
    callers_.resize(n_);
    callees_.resize(n_);
    for (const auto& e : graph.edges) {
      if (e.src == e.dst) continue;
      callers_[e.dst].push_back(e.src);
      callees_[e.src].push_back(e.dst);
    }
    for (std::size_t v = 0; v < n_; ++v) {
      dedupe(callers_[v]);
      dedupe(callees_[v]);
    }
    module_of_.resize(n_);
    std::iota(module_of_.begin(), module_of_.end(), std::size_t{0});
    alive_.assign(n_, true);
    version_.assign(n_, 0);
    is_entry_.assign(n_, true);
    states_.reserve(n_);
    for (std::size_t v = 0; v < n_; ++v) states_.emplace_back(std::vector<std::size_t>{v}, graph, 1);
    neighbours_.resize(n_);
    for (const auto& e : graph.edges) {
      if (e.src == e.dst) continue;
      neighbours_[e.src][e.dst].out += e.weight;
      neighbours_[e.dst][e.src].in += e.weight;
    }
  }

  ModularizeResult run() {
    for (std::size_t r = 0; r < n_; ++r) evaluate(r, /*only_higher=*/true);
    std::vector<MergeRecord> merges;
    while (!heap_.empty()) {
      if (config_.max_passes != 0 && merges.size() >= config_.max_passes) break;
      const Candidate top = heap_.top();
      heap_.pop();
      if (!alive_[top.a] || !alive_[top.b] || version_[top.a] != top.version_a ||
          version_[top.b] != top.version_b) {
        continue;
      }
      if (!(top.gain > config_.epsilon)) break;
      merges.push_back({states_[top.a].members().front(), states_[top.b].members().front(), top.base_gain,
                        top.locality, top.entry, top.gain});
      const std::size_t survivor = merge(top.a, top.b);
      evaluate(survivor, /*only_higher=*/false);
    }
    return {final_partition(), std::move(merges)};
  }

 private:
  static void dedupe(std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  // Scores every candidate pair (r, t) for neighbouring modules t.
  void evaluate(std::size_t r, bool only_higher) {
    if (neighbours_[r].empty()) return;
    const ModuleState& rs = states_[r];

    // Entries of r that would gain an internal caller from t, and vice versa.
    std::unordered_map<std::size_t, std::size_t> lost_r, lost_t;
    std::vector<std::size_t> touched;
    for (std::size_t f : rs.members()) {
      if (!is_entry_[f]) continue;
      touched.clear();
      for (std::size_t g : callers_[f]) touched.push_back(module_of_[g]);
      dedupe(touched);
      for (std::size_t t : touched) ++lost_r[t];
    }
    std::unordered_set<std::size_t> seen;
    for (std::size_t f : rs.members()) {
      for (std::size_t h : callees_[f]) {
        const std::size_t t = module_of_[h];
        if (t != r && is_entry_[h] && seen.insert(h).second) ++lost_t[t];
      }
    }

    for (const auto& [t, cross] : neighbours_[r]) {
      if (only_higher && t < r) continue;
      const ModuleState& ts = states_[t];
      const double base = delta_q(rs, ts, cross.out, cross.in, graph_.total_weight, config_.normalization);
      double locality = 1.0, entry = 1.0;
      if (config_.locality_bias) locality = locality_bias(rs, ts, n_, config_);
      if (config_.entry_bias) {
        const double merged_entries = static_cast<double>(rs.entry_count() + ts.entry_count()) -
                                      static_cast<double>(lost_r[t] + lost_t[t]);
        entry = entry_bias(static_cast<double>(rs.entry_count()), static_cast<double>(ts.entry_count()),
                           merged_entries);
      }
      const std::size_t lo = std::min(rs.min_ordinal(), ts.min_ordinal());
      const std::size_t hi = std::max(rs.min_ordinal(), ts.min_ordinal());
      heap_.push({base * locality * entry, lo, hi, r, t, version_[r], version_[t], base, locality, entry});
    }
  }

  std::size_t merge(std::size_t a, std::size_t b) {
    const std::size_t big = states_[a].size() >= states_[b].size() ? a : b;
    const std::size_t small = big == a ? b : a;

    for (std::size_t f : states_[small].members()) module_of_[f] = big;

    std::size_t entries = 0;
    auto refresh = [&](std::size_t module) {
      for (std::size_t f : states_[module].members()) {
        if (is_entry_[f]) {
          for (std::size_t g : callers_[f]) {
            if (module_of_[g] == big) {
              is_entry_[f] = false;
              break;
            }
          }
        }
        if (is_entry_[f]) ++entries;
      }
    };
    refresh(big);
    refresh(small);

    states_[big] = ModuleState::merged(states_[big], states_[small], entries);
    states_[small] = ModuleState();

    auto& into = neighbours_[big];
    into.erase(small);
    for (const auto& [t, cross] : neighbours_[small]) {
      if (t == big) continue;
      into[t].out += cross.out;
      into[t].in += cross.in;
      auto& back = neighbours_[t];
      const CrossWeight moved = back[small];
      back.erase(small);
      back[big].out += moved.out;
      back[big].in += moved.in;
    }
    neighbours_[small].clear();

    alive_[small] = false;
    ++version_[big];
    return big;
  }

  Partition final_partition() const {
    std::vector<std::size_t> modules;
    for (std::size_t m = 0; m < n_; ++m) {
      if (alive_[m]) modules.push_back(m);
    }
    std::sort(modules.begin(), modules.end(), [&](std::size_t x, std::size_t y) {
      return states_[x].min_ordinal() < states_[y].min_ordinal();
    });
    std::vector<Partition::ModuleId> rank(n_, 0);
    for (std::size_t i = 0; i < modules.size(); ++i) rank[modules[i]] = static_cast<Partition::ModuleId>(i);
    std::vector<Partition::ModuleId> labels(n_);
    for (std::size_t fn = 0; fn < n_; ++fn) labels[fn] = rank[module_of_[fn]];
    return Partition::from_dense(std::move(labels), modules.size());
  }

  const WeightedGraph& graph_;
  const ModularizerConfig& config_;
  const std::size_t n_;
  std::vector<std::vector<std::size_t>> callers_, callees_;
  std::vector<std::size_t> module_of_;
  std::vector<bool> alive_;
  std::vector<std::size_t> version_;
  std::vector<bool> is_entry_;
  std::vector<ModuleState> states_;
  std::vector<std::unordered_map<std::size_t, CrossWeight>> neighbours_;
  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap_;
};

}  // namespace

ModularizeResult modularize_with_trace(const WeightedGraph& graph, const ModularizerConfig& config) {
  config.validate();
  if (graph.size() == 0) return {Partition(), {}};
  return Agglomerator(graph, config).run();
}

Partition modularize(const WeightedGraph& graph, const ModularizerConfig& config) {
  return modularize_with_trace(graph, config).partition;
}

}  // namespace modx

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace modx {

inline constexpr std::string_view kGraphFormatVersion = "mgx-1";

// One function of the analysed binary. `volume` is the statement (or
// instruction) count; `ordinal` is the rank of `address` among all functions.
struct FunctionNode {
  std::string id;
  std::uint64_t address = 0;
  std::size_t ordinal = 0;
  std::optional<std::string> name;
  std::uint64_t volume = 1;
  std::uint64_t bb_count = 0;
  std::uint64_t cfg_edge_count = 0;
  std::set<std::string> strings;
  std::vector<std::int64_t> constants;  // multiset, kept in exporter order
  std::set<std::string> data_refs;
  bool is_dispatch_target = false;
  bool is_export = false;

  bool operator==(const FunctionNode&) const = default;
};

struct CallEdge {
  std::string caller;
  std::string callee;
  std::uint32_t callsites = 1;

  bool operator==(const CallEdge&) const = default;
};

// Attributed call graph. Functions and edges are addressed by dense index
// once `rebuild_index()` has run; all algorithms in this library work on
// indices and translate back to ids only at the edges of the pipeline.
class ProgramGraph {
 public:
  struct Arc {
    std::size_t src;
    std::size_t dst;
  };

  std::string program_name;

  ProgramGraph() = default;
  ProgramGraph(std::string name, std::vector<FunctionNode> functions,
               std::vector<CallEdge> edges);

  const std::vector<FunctionNode>& functions() const { return functions_; }
  const std::vector<CallEdge>& edges() const { return edges_; }
  std::size_t size() const { return functions_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const FunctionNode& function(std::size_t idx) const { return functions_[idx]; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  // Resolved edges, parallel to edges(). Only meaningful when is_resolved().
  const std::vector<Arc>& arcs() const { return arcs_; }
  // Edge indices leaving / entering a function.
  const std::vector<std::size_t>& out_edges(std::size_t idx) const { return out_[idx]; }
  const std::vector<std::size_t>& in_edges(std::size_t idx) const { return in_[idx]; }
  // Distinct neighbour function indices, self-calls excluded.
  std::vector<std::size_t> callers(std::size_t idx) const;
  std::vector<std::size_t> callees(std::size_t idx) const;

  bool is_resolved() const { return resolved_; }

  // Assigns ordinals from ascending address (ties broken by id).
  void assign_ordinals();

  bool operator==(const ProgramGraph& other) const {
    return program_name == other.program_name && functions_ == other.functions_ &&
           edges_ == other.edges_;
  }

 private:
  void rebuild_index();

  std::vector<FunctionNode> functions_;
  std::vector<CallEdge> edges_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  bool resolved_ = false;
};

// Non-overlapping assignment of functions (by index) to dense module ids.
class Partition {
 public:
  using ModuleId = std::uint32_t;

  Partition() = default;
  // Relabels arbitrary labels to 0..k-1 in order of first appearance.
  explicit Partition(std::vector<ModuleId> labels);

  static Partition singletons(std::size_t n);
  // Keeps labels as given; they must already cover 0..module_count-1.
  static Partition from_dense(std::vector<ModuleId> labels, std::size_t module_count);

  std::size_t size() const { return module_of_.size(); }
  std::size_t module_count() const { return module_count_; }
  ModuleId module_of(std::size_t fn) const { return module_of_[fn]; }
  const std::vector<ModuleId>& labels() const { return module_of_; }
  std::vector<std::vector<std::size_t>> members() const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<ModuleId> module_of_;
  std::size_t module_count_ = 0;
};

class GraphFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ViolationKind {
  kDuplicateId,
  kDanglingEndpoint,
  kDuplicateEdge,
  kZeroVolume,
  kZeroCallsites,
  kOrdinalPermutation,
  kOrdinalOrder,
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

std::string_view to_string(ViolationKind kind);

// Checks every structural invariant of the graph model. Never throws.
std::vector<Violation> validate(const ProgramGraph& graph);

// Parses an mgx-1 document. Ordinals are always recomputed from addresses.
// Throws GraphFormatError on malformed input or any invariant violation.
ProgramGraph load_program_graph(std::istream& in);
ProgramGraph load_program_graph_file(const std::string& path);
ProgramGraph parse_program_graph(std::string_view text);

void save_program_graph(const ProgramGraph& graph, std::ostream& out);
std::string serialize_program_graph(const ProgramGraph& graph);

// Partition document (mpt-1).
inline constexpr std::string_view kPartitionFormatVersion = "mpt-1";
std::string serialize_partition(const ProgramGraph& graph, const Partition& partition);
Partition parse_partition(const ProgramGraph& graph, std::string_view text);

}  // namespace modx

#include "modx/graph_model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace modx {

using nlohmann::json;

ProgramGraph::ProgramGraph(std::string name, std::vector<FunctionNode> functions,
                           std::vector<CallEdge> edges)
    : program_name(std::move(name)),
      functions_(std::move(functions)),
      edges_(std::move(edges)) {
  rebuild_index();
}

void ProgramGraph::rebuild_index() {
  by_id_.clear();
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    by_id_.emplace(functions_[i].id, i);  // first occurrence wins
  }
  out_.assign(functions_.size(), {});
  in_.assign(functions_.size(), {});
  arcs_.clear();
  resolved_ = true;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto src = by_id_.find(edges_[e].caller);
    auto dst = by_id_.find(edges_[e].callee);
    if (src == by_id_.end() || dst == by_id_.end()) {
      resolved_ = false;
      arcs_.push_back({0, 0});
      continue;
    }
    arcs_.push_back({src->second, dst->second});
    out_[src->second].push_back(e);
    in_[dst->second].push_back(e);
  }
}

std::optional<std::size_t> ProgramGraph::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> ProgramGraph::callers(std::size_t idx) const {
  std::vector<std::size_t> result;
  for (std::size_t e : in_[idx]) {
    if (arcs_[e].src != idx) result.push_back(arcs_[e].src);
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<std::size_t> ProgramGraph::callees(std::size_t idx) const {
  std::vector<std::size_t> result;
  for (std::size_t e : out_[idx]) {
    if (arcs_[e].dst != idx) result.push_back(arcs_[e].dst);
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

void ProgramGraph::assign_ordinals() {
  std::vector<std::size_t> order(functions_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (functions_[a].address != functions_[b].address)
      return functions_[a].address < functions_[b].address;
    return functions_[a].id < functions_[b].id;
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    functions_[order[rank]].ordinal = rank;
  }
}

// ---------------------------------------------------------------------------

Partition::Partition(std::vector<ModuleId> labels) : module_of_(std::move(labels)) {
  std::unordered_map<ModuleId, ModuleId> dense;
  for (auto& label : module_of_) {
    auto [it, inserted] = dense.emplace(label, static_cast<ModuleId>(dense.size()));
    label = it->second;
  }
  module_count_ = dense.size();
}

Partition Partition::singletons(std::size_t n) {
  std::vector<ModuleId> labels(n);
  std::iota(labels.begin(), labels.end(), ModuleId{0});
  return Partition(std::move(labels));
}

Partition Partition::from_dense(std::vector<ModuleId> labels, std::size_t module_count) {
  std::vector<bool> used(module_count, false);
  for (ModuleId label : labels) {
    if (label >= module_count) throw std::invalid_argument("partition label out of range");
    used[label] = true;
  }
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw std::invalid_argument("partition labels are not dense");
  }
  Partition p;
  p.module_of_ = std::move(labels);
  p.module_count_ = module_count;
  return p;
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> result(module_count_);
  for (std::size_t fn = 0; fn < module_of_.size(); ++fn) {
    result[module_of_[fn]].push_back(fn);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateId: return "duplicate-id";
    case ViolationKind::kDanglingEndpoint: return "dangling-endpoint";
    case ViolationKind::kDuplicateEdge: return "duplicate-edge";
    case ViolationKind::kZeroVolume: return "zero-volume";
    case ViolationKind::kZeroCallsites: return "zero-callsites";
    case ViolationKind::kOrdinalPermutation: return "ordinal-permutation";
    case ViolationKind::kOrdinalOrder: return "ordinal-order";
  }
  return "unknown";
}

std::vector<Violation> validate(const ProgramGraph& graph) {
  std::vector<Violation> out;
  const auto& fns = graph.functions();

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    auto [it, inserted] = seen.emplace(fns[i].id, i);
    if (!inserted) {
      out.push_back({ViolationKind::kDuplicateId,
                     "functions[" + std::to_string(i) + "]: id \"" + fns[i].id +
                         "\" already used by functions[" + std::to_string(it->second) + "]"});
    }
    if (fns[i].volume < 1) {
      out.push_back({ViolationKind::kZeroVolume,
                     "functions[" + std::to_string(i) + "] (\"" + fns[i].id + "\"): volume must be >= 1"});
    }
  }

  std::set<std::pair<std::string, std::string>> pairs;
  const auto& edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string where = "edges[" + std::to_string(e) + "]";
    for (const auto* endpoint : {&edges[e].caller, &edges[e].callee}) {
      if (!seen.count(*endpoint)) {
        out.push_back({ViolationKind::kDanglingEndpoint,
                       where + ": unknown function id \"" + *endpoint + "\""});
      }
    }
    if (!pairs.emplace(edges[e].caller, edges[e].callee).second) {
      out.push_back({ViolationKind::kDuplicateEdge, where + ": duplicate edge " + edges[e].caller +
                                                        " -> " + edges[e].callee});
    }
    if (edges[e].callsites < 1) {
      out.push_back({ViolationKind::kZeroCallsites, where + ": callsites must be >= 1"});
    }
  }

  std::vector<bool> hit(fns.size(), false);
  bool permutation = true;
  for (const auto& fn : fns) {
    if (fn.ordinal >= fns.size() || hit[fn.ordinal]) {
      permutation = false;
      break;
    }
    hit[fn.ordinal] = true;
  }
  if (!permutation) {
    out.push_back({ViolationKind::kOrdinalPermutation,
                   "ordinals do not form a permutation of 0.." + std::to_string(fns.size()) + "-1"});
  } else {
    std::vector<const FunctionNode*> by_ordinal(fns.size());
    for (const auto& fn : fns) by_ordinal[fn.ordinal] = &fn;
    for (std::size_t k = 1; k < by_ordinal.size(); ++k) {
      if (by_ordinal[k - 1]->address > by_ordinal[k]->address) {
        out.push_back({ViolationKind::kOrdinalOrder,
                       "ordinal " + std::to_string(k) + " (\"" + by_ordinal[k]->id +
                           "\") has a lower address than ordinal " + std::to_string(k - 1)});
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw GraphFormatError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::uint64_t get_unsigned(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  fail(where, "expected a non-negative integer");
}

std::uint64_t get_unsigned_or(const json& obj, const char* key, std::uint64_t fallback,
                              const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return get_unsigned(*it, where + "." + key);
}

bool get_bool_or(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (!it->is_boolean()) fail(where + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::set<std::string> get_string_set(const json& obj, const char* key, const std::string& where) {
  std::set<std::string> result;
  auto it = obj.find(key);
  if (it == obj.end()) return result;
  if (!it->is_array()) fail(where + "." + key, "expected an array of strings");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& s = (*it)[i];
    if (!s.is_string()) fail(where + "." + key + "[" + std::to_string(i) + "]", "expected a string");
    result.insert(s.get<std::string>());
  }
  return result;
}

FunctionNode parse_function(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  FunctionNode fn;
  fn.id = get_string(obj, "id", where);
  const std::string at = where + " (\"" + fn.id + "\")";
  fn.address = get_unsigned(require(obj, "address", at), at + ".address");
  if (auto it = obj.find("name"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail(at + ".name", "expected a string");
    fn.name = it->get<std::string>();
  }
  fn.volume = get_unsigned(require(obj, "volume", at), at + ".volume");
  if (fn.volume < 1) fail(at + ".volume", "volume must be >= 1");
  fn.bb_count = get_unsigned_or(obj, "bb_count", 0, at);
  fn.cfg_edge_count = get_unsigned_or(obj, "cfg_edge_count", 0, at);
  fn.strings = get_string_set(obj, "strings", at);
  fn.data_refs = get_string_set(obj, "data_refs", at);
  if (auto it = obj.find("constants"); it != obj.end()) {
    if (!it->is_array()) fail(at + ".constants", "expected an array of integers");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& c = (*it)[i];
      if (c.is_number_unsigned() && c.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        fail(at + ".constants[" + std::to_string(i) + "]", "constant exceeds 64-bit signed range");
      }
      if (!c.is_number_integer()) {
        fail(at + ".constants[" + std::to_string(i) + "]", "expected an integer");
      }
      fn.constants.push_back(c.get<std::int64_t>());
    }
  }
  fn.is_dispatch_target = get_bool_or(obj, "is_dispatch_target", at);
  fn.is_export = get_bool_or(obj, "is_export", at);
  return fn;
}

json function_to_json(const FunctionNode& fn) {
  json obj;
  obj["id"] = fn.id;
  obj["address"] = fn.address;
  if (fn.name) obj["name"] = *fn.name;
  obj["volume"] = fn.volume;
  obj["bb_count"] = fn.bb_count;
  obj["cfg_edge_count"] = fn.cfg_edge_count;
  obj["strings"] = fn.strings;
  obj["constants"] = fn.constants;
  obj["data_refs"] = fn.data_refs;
  obj["is_dispatch_target"] = fn.is_dispatch_target;
  obj["is_export"] = fn.is_export;
  return obj;
}

}  // namespace

ProgramGraph parse_program_graph(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphFormatError(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) fail("document", "expected a top-level object");
  const std::string version = get_string(doc, "version", "document");
  if (version != kGraphFormatVersion) {
    fail("document.version", "unsupported version \"" + version + "\" (expected \"" +
                                 std::string(kGraphFormatVersion) + "\")");
  }
  std::string name;
  if (auto it = doc.find("program_name"); it != doc.end()) {
    if (!it->is_string()) fail("document.program_name", "expected a string");
    name = it->get<std::string>();
  }

  const json& fns = require(doc, "functions", "document");
  if (!fns.is_array()) fail("document.functions", "expected an array");
  std::vector<FunctionNode> functions;
  std::unordered_map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const std::string where = "functions[" + std::to_string(i) + "]";
    FunctionNode fn = parse_function(fns[i], where);
    if (auto [it, inserted] = ids.emplace(fn.id, i); !inserted) {
      fail(where, "duplicate id \"" + fn.id + "\" (first defined at functions[" +
                      std::to_string(it->second) + "])");
    }
    functions.push_back(std::move(fn));
  }

  std::vector<CallEdge> edges;
  if (auto it = doc.find("edges"); it != doc.end()) {
    if (!it->is_array()) fail("document.edges", "expected an array");
    std::set<std::pair<std::string, std::string>> pairs;
    for (std::size_t e = 0; e < it->size(); ++e) {
      const std::string where = "edges[" + std::to_string(e) + "]";
      const json& obj = (*it)[e];
      if (!obj.is_object()) fail(where, "expected an object");
      CallEdge edge;
      edge.caller = get_string(obj, "caller", where);
      edge.callee = get_string(obj, "callee", where);
      const std::uint64_t callsites = get_unsigned_or(obj, "callsites", 1, where);
      if (callsites < 1 || callsites > UINT32_MAX) fail(where + ".callsites", "must be in [1, 2^32)");
      edge.callsites = static_cast<std::uint32_t>(callsites);
      for (const auto* endpoint : {&edge.caller, &edge.callee}) {
        if (!ids.count(*endpoint)) fail(where, "dangling endpoint: unknown function id \"" + *endpoint + "\"");
      }
      if (!pairs.emplace(edge.caller, edge.callee).second) {
        fail(where, "duplicate edge " + edge.caller + " -> " + edge.callee);
      }
      edges.push_back(std::move(edge));
    }
  }

  ProgramGraph graph(std::move(name), std::move(functions), std::move(edges));
  graph.assign_ordinals();
  return graph;
}

ProgramGraph load_program_graph(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_program_graph(buffer.str());
}

ProgramGraph load_program_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return load_program_graph(in);
  } catch (const GraphFormatError& e) {
    throw GraphFormatError(path + ": " + e.what());
  }
}

std::string serialize_program_graph(const ProgramGraph& graph) {
  json doc;
  doc["version"] = kGraphFormatVersion;
  doc["program_name"] = graph.program_name;
  json fns = json::array();
  for (const auto& fn : graph.functions()) fns.push_back(function_to_json(fn));
  doc["functions"] = std::move(fns);
  json edges = json::array();
  for (const auto& e : graph.edges()) {
    edges.push_back({{"caller", e.caller}, {"callee", e.callee}, {"callsites", e.callsites}});
  }
  doc["edges"] = std::move(edges);
  return doc.dump(1) + "\n";
}

void save_program_graph(const ProgramGraph& graph, std::ostream& out) {
  out << serialize_program_graph(graph);
}

// ---------------------------------------------------------------------------

std::string serialize_partition(const ProgramGraph& graph, const Partition& partition) {
  json doc;
  doc["version"] = kPartitionFormatVersion;
  doc["program_name"] = graph.program_name;
  json modules = json::array();
  const auto members = partition.members();
  for (std::size_t m = 0; m < members.size(); ++m) {
    json ids = json::array();
    for (std::size_t fn : members[m]) ids.push_back(graph.function(fn).id);
    modules.push_back({{"id", m}, {"members", std::move(ids)}});
  }
  doc["modules"] = std::move(modules);
  return doc.dump(1) + "\n";
}

Partition parse_partition(const ProgramGraph& graph, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphFormatError(std::string("malformed partition document: ") + e.what());
  }
  if (!doc.is_object()) fail("partition", "expected a top-level object");
  if (get_string(doc, "version", "partition") != kPartitionFormatVersion) {
    fail("partition.version", "unsupported version");
  }
  const json& modules = require(doc, "modules", "partition");
  if (!modules.is_array()) fail("partition.modules", "expected an array");
  constexpr auto kUnset = static_cast<Partition::ModuleId>(-1);
  std::vector<Partition::ModuleId> labels(graph.size(), kUnset);
  for (std::size_t m = 0; m < modules.size(); ++m) {
    const std::string where = "modules[" + std::to_string(m) + "]";
    const json& members = require(modules[m], "members", where);
    if (!members.is_array()) fail(where + ".members", "expected an array");
    for (const json& id : members) {
      if (!id.is_string()) fail(where + ".members", "expected function ids");
      auto idx = graph.index_of(id.get<std::string>());
      if (!idx) fail(where, "unknown function id \"" + id.get<std::string>() + "\"");
      if (labels[*idx] != kUnset) fail(where, "function \"" + id.get<std::string>() + "\" assigned twice");
      labels[*idx] = static_cast<Partition::ModuleId>(m);
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnset) fail("partition", "function \"" + graph.function(i).id + "\" not assigned");
  }
  return Partition(std::move(labels));
}

}  // namespace modx

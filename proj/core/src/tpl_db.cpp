#include "modx/tpl_db.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace modx {

using nlohmann::json;

double library_importance(std::uint64_t ref_frequency, std::size_t module_count) {
  if (module_count == 0) return 0.0;
  return std::log(static_cast<double>(ref_frequency) + 1.0) / static_cast<double>(module_count);
}

void SignatureDatabase::add_library(LibrarySignature library) {
  auto it = std::find_if(libraries_.begin(), libraries_.end(),
                         [&](const LibrarySignature& l) { return l.library_name == library.library_name; });
  if (it != libraries_.end()) {
    *it = std::move(library);
  } else {
    libraries_.push_back(std::move(library));
  }
  recompute_corpus_stats();
}

void SignatureDatabase::recompute_corpus_stats() {
  std::vector<const ModuleSignature*> all;
  std::size_t functions = 0;
  for (const auto& lib : libraries_) {
    for (const auto& m : lib.modules) {
      all.push_back(&m);
      functions += m.function_count;
    }
  }
  stats_ = CorpusStats::from_modules(all);
  mean_module_size_ = all.empty() ? 0.0 : static_cast<double>(functions) / static_cast<double>(all.size());
}

double SignatureDatabase::module_importance(std::size_t library, std::size_t module) const {
  if (mean_module_size_ <= 0.0) return 0.0;
  return static_cast<double>(libraries_.at(library).modules.at(module).function_count) / mean_module_size_;
}

double SignatureDatabase::matching_confidence(std::size_t library, std::size_t module) const {
  return module_importance(library, module) * libraries_.at(library).importance();
}

// ---------------------------------------------------------------------------

std::vector<ModuleSignature> sign_program(const ProgramGraph& graph, const PipelineConfig& config,
                                          Partition* partition_out) {
  const WeightedGraph weighted = propagate_volumes(graph, config.propagation);
  Partition partition = modularize(weighted, config.modularizer);
  auto signatures = extract_all_signatures(graph, partition, config.features);
  if (partition_out) *partition_out = std::move(partition);
  return signatures;
}

LibrarySignature build_library_signature(const ProgramGraph& graph, const LibraryMeta& meta,
                                         const PipelineConfig& config) {
  LibrarySignature lib;
  lib.library_name = meta.name;
  lib.version = meta.version;
  lib.ref_frequency = meta.ref_frequency;
  lib.modules = sign_program(graph, config);
  return lib;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view kind_name(AnchorKind kind) {
  return kind == AnchorKind::kSharedData ? "data-shared" : "dispatch";
}

json module_to_json(const ModuleSignature& m) {
  json obj;
  obj["module_id"] = m.module_id;
  obj["function_count"] = m.function_count;
  obj["strings"] = m.string_set;
  json constants = json::array();
  for (const auto& [c, n] : m.constant_bag) constants.push_back({c, n});
  obj["constants"] = std::move(constants);
  json kernel = json::array();
  for (const auto& hist : m.kernel_histograms) {
    json bins = json::array();
    for (const auto& [bin, n] : hist) bins.push_back({bin, n});
    kernel.push_back(std::move(bins));
  }
  obj["kernel"] = std::move(kernel);
  obj["edge_vectors"] = m.edge_vectors;
  json functions = json::array();
  for (const auto& f : m.functions) {
    functions.push_back({{"id", f.id}, {"volume", f.volume}, {"vector", f.vector}});
  }
  obj["functions"] = std::move(functions);
  json groups = json::array();
  for (const auto& g : m.anchor_groups) {
    groups.push_back({{"kind", kind_name(g.kind)}, {"members", g.members}});
  }
  obj["anchor_groups"] = std::move(groups);
  return obj;
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DatabaseError(where + ": missing \"" + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw DatabaseError(where + "." + key + ": " + e.what());
  }
}

ModuleSignature module_from_json(const json& obj, const std::string& where) {
  ModuleSignature m;
  m.module_id = field<std::uint32_t>(obj, "module_id", where);
  m.function_count = field<std::size_t>(obj, "function_count", where);
  m.string_set = field<std::set<std::string>>(obj, "strings", where);
  for (const auto& pair : field<std::vector<std::pair<std::int64_t, std::uint32_t>>>(obj, "constants", where)) {
    m.constant_bag.emplace(pair.first, pair.second);
  }
  for (const auto& bins :
       field<std::vector<std::vector<std::pair<std::uint64_t, std::uint32_t>>>>(obj, "kernel", where)) {
    KernelHistogram hist(bins.begin(), bins.end());
    m.kernel_histograms.push_back(std::move(hist));
  }
  m.edge_vectors = field<std::vector<EdgeVector>>(obj, "edge_vectors", where);
  for (const json& f : field<json>(obj, "functions", where)) {
    m.functions.push_back({field<std::string>(f, "id", where + ".functions"),
                           field<std::uint64_t>(f, "volume", where + ".functions"),
                           field<FunctionVector>(f, "vector", where + ".functions")});
  }
  for (const json& g : field<json>(obj, "anchor_groups", where)) {
    AnchorGroup group;
    const auto kind = field<std::string>(g, "kind", where + ".anchor_groups");
    if (kind == "data-shared") {
      group.kind = AnchorKind::kSharedData;
    } else if (kind == "dispatch") {
      group.kind = AnchorKind::kDispatch;
    } else {
      throw DatabaseError(where + ".anchor_groups: unknown kind \"" + kind + "\"");
    }
    group.members = field<std::vector<std::size_t>>(g, "members", where + ".anchor_groups");
    for (std::size_t idx : group.members) {
      if (idx >= m.functions.size()) throw DatabaseError(where + ".anchor_groups: member index out of range");
    }
    m.anchor_groups.push_back(std::move(group));
  }
  if (m.function_count != m.functions.size() || m.function_count == 0) {
    throw DatabaseError(where + ": function_count does not match functions");
  }
  return m;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatabaseError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatabaseError("cannot write " + path.string());
  out << text;
}

std::string directory_name(const std::string& library) {
  std::string out;
  for (char c : library) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out += keep ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace

std::string serialize_library_signature(const LibrarySignature& library) {
  json doc;
  doc["version"] = kSignatureFormatVersion;
  doc["library_name"] = library.library_name;
  doc["library_version"] = library.version;
  doc["ref_frequency"] = library.ref_frequency;
  json modules = json::array();
  for (const auto& m : library.modules) modules.push_back(module_to_json(m));
  doc["modules"] = std::move(modules);
  return doc.dump(1) + "\n";
}

LibrarySignature parse_library_signature(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DatabaseError(std::string("corrupt signature document: ") + e.what());
  }
  if (!doc.is_object()) throw DatabaseError("corrupt signature document: expected an object");
  const auto version = field<std::string>(doc, "version", "signature");
  if (version != kSignatureFormatVersion) {
    throw DatabaseError("unsupported signature version \"" + version + "\" (expected \"" +
                        std::string(kSignatureFormatVersion) + "\")");
  }
  LibrarySignature lib;
  lib.library_name = field<std::string>(doc, "library_name", "signature");
  lib.version = field<std::string>(doc, "library_version", "signature");
  lib.ref_frequency = field<std::uint64_t>(doc, "ref_frequency", "signature");
  const json modules = field<json>(doc, "modules", "signature");
  if (!modules.is_array()) throw DatabaseError("signature.modules: expected an array");
  for (std::size_t i = 0; i < modules.size(); ++i) {
    lib.modules.push_back(module_from_json(modules[i], "modules[" + std::to_string(i) + "]"));
  }
  return lib;
}

void save_db(const SignatureDatabase& db, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DatabaseError("cannot create " + dir.string() + ": " + ec.message());

  json index;
  index["version"] = kDatabaseFormatVersion;
  json libraries = json::array();
  for (const auto& lib : db.libraries()) {
    const std::string sub = directory_name(lib.library_name);
    std::filesystem::create_directories(dir / sub, ec);
    if (ec) throw DatabaseError("cannot create " + (dir / sub).string() + ": " + ec.message());
    write_text(dir / sub / "signature.json", serialize_library_signature(lib));
    libraries.push_back({{"name", lib.library_name}, {"directory", sub}});
  }
  index["libraries"] = std::move(libraries);
  index["module_count"] = db.corpus_stats().module_count;
  json df = json::array();
  for (const auto& [c, n] : db.corpus_stats().document_frequency) df.push_back({c, n});
  index["document_frequency"] = std::move(df);
  write_text(dir / "corpus.json", index.dump(1) + "\n");
}

SignatureDatabase load_db(const std::filesystem::path& dir) {
  json index;
  try {
    index = json::parse(read_text(dir / "corpus.json"));
  } catch (const json::parse_error& e) {
    throw DatabaseError("corrupt corpus document: " + std::string(e.what()));
  }
  if (!index.is_object()) throw DatabaseError("corrupt corpus document: expected an object");
  const auto version = field<std::string>(index, "version", "corpus");
  if (version != kDatabaseFormatVersion) {
    throw DatabaseError("unsupported database version \"" + version + "\" (expected \"" +
                        std::string(kDatabaseFormatVersion) + "\")");
  }
  SignatureDatabase db;
  for (const json& entry : field<json>(index, "libraries", "corpus")) {
    const auto sub = field<std::string>(entry, "directory", "corpus.libraries");
    LibrarySignature lib;
    try {
      lib = parse_library_signature(read_text(dir / sub / "signature.json"));
    } catch (const DatabaseError& e) {
      throw DatabaseError((dir / sub / "signature.json").string() + ": " + e.what());
    }
    if (lib.library_name != field<std::string>(entry, "name", "corpus.libraries")) {
      throw DatabaseError("corpus entry for \"" + sub + "\" names a different library");
    }
    db.add_library(std::move(lib));
  }
  CorpusStats stored;
  stored.module_count = field<std::size_t>(index, "module_count", "corpus");
  for (const auto& [c, n] :
       field<std::vector<std::pair<std::int64_t, std::size_t>>>(index, "document_frequency", "corpus")) {
    stored.document_frequency.emplace(c, n);
  }
  if (!(stored == db.corpus_stats())) {
    throw DatabaseError("corpus statistics do not match the stored library signatures");
  }
  return db;
}

}  // namespace modx

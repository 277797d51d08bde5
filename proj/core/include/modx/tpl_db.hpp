#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modx/graph_model.hpp"
#include "modx/modularizer.hpp"
#include "modx/module_features.hpp"
#include "modx/volume_weighting.hpp"

namespace modx {

inline constexpr std::string_view kSignatureFormatVersion = "msig-1";
inline constexpr std::string_view kDatabaseFormatVersion = "mdb-1";

// Everything needed to turn a call graph into module signatures.
struct PipelineConfig {
  PropagationConfig propagation;
  ModularizerConfig modularizer;
  FeatureConfig features;
};

struct LibraryMeta {
  std::string name;
  std::string version;
  std::uint64_t ref_frequency = 1;
};

// ln(ref_frequency + 1) / module_count; 0 for an empty library.
double library_importance(std::uint64_t ref_frequency, std::size_t module_count);

struct LibrarySignature {
  std::string library_name;
  std::string version;
  std::uint64_t ref_frequency = 1;
  std::vector<ModuleSignature> modules;

  std::size_t module_count() const { return modules.size(); }
  double importance() const { return library_importance(ref_frequency, modules.size()); }
  bool operator==(const LibrarySignature&) const = default;
};

class DatabaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SignatureDatabase {
 public:
  SignatureDatabase() = default;

  // Adds or replaces (same name) a library and refreshes corpus statistics.
  void add_library(LibrarySignature library);

  const std::vector<LibrarySignature>& libraries() const { return libraries_; }
  const CorpusStats& corpus_stats() const { return stats_; }
  bool empty() const { return total_modules() == 0; }
  std::size_t total_modules() const { return stats_.module_count; }

  // |m_k| divided by the mean module size over the whole database.
  double module_importance(std::size_t library, std::size_t module) const;
  double matching_confidence(std::size_t library, std::size_t module) const;

  void recompute_corpus_stats();

  bool operator==(const SignatureDatabase& other) const {
    return libraries_ == other.libraries_ && stats_ == other.stats_;
  }

 private:
  std::vector<LibrarySignature> libraries_;
  CorpusStats stats_;
  double mean_module_size_ = 0.0;
};

// Modularizes `graph` and extracts one signature per module.
std::vector<ModuleSignature> sign_program(const ProgramGraph& graph, const PipelineConfig& config,
                                          Partition* partition_out = nullptr);

LibrarySignature build_library_signature(const ProgramGraph& graph, const LibraryMeta& meta,
                                         const PipelineConfig& config = {});

// msig-1 documents (a library signature set).
std::string serialize_library_signature(const LibrarySignature& library);
LibrarySignature parse_library_signature(std::string_view text);

// mdb-1 layout: <dir>/corpus.json plus <dir>/<library>/signature.json.
void save_db(const SignatureDatabase& db, const std::filesystem::path& dir);
SignatureDatabase load_db(const std::filesystem::path& dir);

}  // namespace modx

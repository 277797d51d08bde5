#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modx/similarity.hpp"
#include "modx/tpl_db.hpp"

namespace modx {

inline constexpr std::string_view kReportFormatVersion = "mrep-1";

struct DetectorConfig {
  double tau_match = 0.70;  // minimum aggregate similarity
  double margin = 0.05;     // required lead over the runner-up
  double theta_lib = 0.20;  // minimum library evidence
  std::size_t top_k = 5;
  bool prefilter = true;    // size/shared-channel pruning before full scoring

  void validate() const;
};

struct RankedCandidate {
  std::size_t library;  // index into SignatureDatabase::libraries()
  std::size_t module;   // index into LibrarySignature::modules
  SimilarityBreakdown breakdown;
};

struct ModuleMatch {
  std::uint32_t program_module_id = 0;
  std::string library_name;
  std::uint32_t library_module_id = 0;
  SimilarityBreakdown breakdown;
  double mc = 0.0;
  double combined = 0.0;
  bool duplicate = false;  // another program module matched the same library module
};

struct LibraryVerdict {
  std::string library_name;
  double evidence = 0.0;
  std::size_t matched_module_count = 0;
  bool detected = false;
};

struct DetectionReport {
  std::string program_name;
  std::vector<ModuleMatch> matches;
  std::vector<LibraryVerdict> verdicts;
};

struct DetectionSettings {
  PipelineConfig pipeline;
  ChannelWeights weights;
  DetectorConfig detector;
};

// Cheap necessary condition for a candidate to be scored at all.
bool passes_prefilter(const ModuleSignature& program_module, const ModuleSignature& library_module);

// Descending aggregate, ties by library name then module id; at most top_k.
std::vector<RankedCandidate> rank_candidates(const ModuleSignature& program_module, const SignatureDatabase& db,
                                       const ChannelWeights& weights, const DetectorConfig& config);

// Applies acceptance and library verdicts to already-signed program modules.
DetectionReport detect_signatures(const std::string& program_name, const std::vector<ModuleSignature>& modules,
                                  const SignatureDatabase& db, const DetectionSettings& settings);

DetectionReport detect(const ProgramGraph& graph, const SignatureDatabase& db, const DetectionSettings& settings = {});

enum class ReportFormat { kText, kMachine };
ReportFormat parse_report_format(std::string_view name);

std::string render_report(const DetectionReport& report, ReportFormat format);
DetectionReport parse_machine_report(std::string_view text);

}  // namespace modx

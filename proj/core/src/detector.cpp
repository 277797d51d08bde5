#include "modx/detector.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace modx {

using nlohmann::json;

void DetectorConfig::validate() const {
  if (!(tau_match >= 0.0) || !(margin >= 0.0) || !(theta_lib >= 0.0)) {
    throw std::invalid_argument("detector thresholds must be >= 0");
  }
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
}

namespace {

template <typename Map>
bool keys_intersect(const Map& a, const Map& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

bool sets_intersect(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

bool passes_prefilter(const ModuleSignature& p, const ModuleSignature& l) {
  const auto small = std::min(p.function_count, l.function_count);
  const auto large = std::max(p.function_count, l.function_count);
  if (large > 3 * small) return false;
  if (sets_intersect(p.string_set, l.string_set)) return true;
  if (keys_intersect(p.constant_bag, l.constant_bag)) return true;
  for (std::size_t t = 0; t < p.kernel_histograms.size() && t < l.kernel_histograms.size(); ++t) {
    if (keys_intersect(p.kernel_histograms[t], l.kernel_histograms[t])) return true;
  }
  return false;
}

std::vector<RankedCandidate> rank_candidates(const ModuleSignature& program_module, const SignatureDatabase& db,
                                             const ChannelWeights& weights, const DetectorConfig& config) {
  std::vector<RankedCandidate> all;
  const auto& libs = db.libraries();
  for (std::size_t l = 0; l < libs.size(); ++l) {
    for (std::size_t m = 0; m < libs[l].modules.size(); ++m) {
      const ModuleSignature& target = libs[l].modules[m];
      if (config.prefilter && !passes_prefilter(program_module, target)) continue;
      all.push_back({l, m, aggregate(program_module, target, db.corpus_stats(), weights)});
    }
  }
  std::sort(all.begin(), all.end(), [&](const RankedCandidate& x, const RankedCandidate& y) {
    if (x.breakdown.aggregate != y.breakdown.aggregate) return x.breakdown.aggregate > y.breakdown.aggregate;
    const auto& lx = libs[x.library].library_name;
    const auto& ly = libs[y.library].library_name;
    if (lx != ly) return lx < ly;
    return libs[x.library].modules[x.module].module_id < libs[y.library].modules[y.module].module_id;
  });
  if (all.size() > config.top_k) all.resize(config.top_k);
  return all;
}

DetectionReport detect_signatures(const std::string& program_name, const std::vector<ModuleSignature>& modules,
                                  const SignatureDatabase& db, const DetectionSettings& settings) {
  settings.detector.validate();
  if (db.empty()) throw std::invalid_argument("signature database is empty");
  const auto& libs = db.libraries();

  DetectionReport report;
  report.program_name = program_name;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> hits;
  for (const auto& module : modules) {
    const auto ranked = rank_candidates(module, db, settings.weights, settings.detector);
    if (ranked.empty()) continue;
    const double best = ranked.front().breakdown.aggregate;
    const double runner_up = ranked.size() > 1 ? ranked[1].breakdown.aggregate : 0.0;
    if (best < settings.detector.tau_match || best - runner_up < settings.detector.margin) continue;

    const RankedCandidate& top = ranked.front();
    ModuleMatch match;
    match.program_module_id = module.module_id;
    match.library_name = libs[top.library].library_name;
    match.library_module_id = libs[top.library].modules[top.module].module_id;
    match.breakdown = top.breakdown;
    match.mc = db.matching_confidence(top.library, top.module);
    match.combined = best * match.mc;
    ++hits[{top.library, top.module}];
    report.matches.push_back(std::move(match));
  }
  for (auto& match : report.matches) {
    for (const auto& [key, count] : hits) {
      if (count > 1 && libs[key.first].library_name == match.library_name &&
          libs[key.first].modules[key.second].module_id == match.library_module_id) {
        match.duplicate = true;
      }
    }
  }

  for (const auto& lib : libs) {
    LibraryVerdict verdict;
    verdict.library_name = lib.library_name;
    for (const auto& match : report.matches) {
      if (match.library_name != lib.library_name) continue;
      verdict.evidence += match.combined;
      ++verdict.matched_module_count;
    }
    verdict.detected = verdict.matched_module_count > 0 && verdict.evidence >= settings.detector.theta_lib;
    report.verdicts.push_back(std::move(verdict));
  }
  return report;
}

DetectionReport detect(const ProgramGraph& graph, const SignatureDatabase& db, const DetectionSettings& settings) {
  if (db.empty()) throw std::invalid_argument("signature database is empty");
  const auto modules = sign_program(graph, settings.pipeline);
  return detect_signatures(graph.program_name, modules, db, settings);
}

// ---------------------------------------------------------------------------

ReportFormat parse_report_format(std::string_view name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "machine") return ReportFormat::kMachine;
  throw std::invalid_argument("unknown report format \"" + std::string(name) + "\" (expected text|machine)");
}

namespace {

nlohmann::ordered_json breakdown_to_json(const SimilarityBreakdown& b) {
  using oj = nlohmann::ordered_json;
  oj channels = oj::object();
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto key = std::string(to_string(static_cast<Channel>(c)));
    channels[key] = b.channel[c] ? oj(*b.channel[c]) : oj(nullptr);
  }
  return {{"aggregate", b.aggregate}, {"channels", channels}};
}

SimilarityBreakdown breakdown_from_json(const json& obj) {
  SimilarityBreakdown b;
  b.aggregate = obj.at("aggregate").get<double>();
  const json& channels = obj.at("channels");
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const json& v = channels.at(std::string(to_string(static_cast<Channel>(c))));
    if (!v.is_null()) b.channel[c] = v.get<double>();
  }
  return b;
}

}  // namespace

std::string render_report(const DetectionReport& report, ReportFormat format) {
  if (format == ReportFormat::kMachine) {
    using oj = nlohmann::ordered_json;
    oj doc;
    doc["version"] = kReportFormatVersion;
    doc["program_name"] = report.program_name;
    oj verdicts = oj::array();
    for (const auto& v : report.verdicts) {
      verdicts.push_back({{"library_name", v.library_name},
                          {"evidence", v.evidence},
                          {"matched_module_count", v.matched_module_count},
                          {"detected", v.detected}});
    }
    doc["verdicts"] = std::move(verdicts);
    oj matches = oj::array();
    for (const auto& m : report.matches) {
      matches.push_back({{"program_module_id", m.program_module_id},
                         {"library_name", m.library_name},
                         {"library_module_id", m.library_module_id},
                         {"similarity", breakdown_to_json(m.breakdown)},
                         {"mc", m.mc},
                         {"combined", m.combined},
                         {"duplicate", m.duplicate}});
    }
    doc["matches"] = std::move(matches);
    return doc.dump(1) + "\n";
  }

  std::string out = "program " + report.program_name + "\n";
  char line[512];
  out += "verdicts:\n";
  for (const auto& v : report.verdicts) {
    std::snprintf(line, sizeof line, "  %-24s %-12s evidence=%.6f modules=%zu\n", v.library_name.c_str(),
                  v.detected ? "DETECTED" : "not-detected", v.evidence, v.matched_module_count);
    out += line;
  }
  out += "matches:\n";
  for (const auto& m : report.matches) {
    std::snprintf(line, sizeof line, "  module %-6u -> %s#%u similarity=%.6f mc=%.6f combined=%.6f%s\n",
                  m.program_module_id, m.library_name.c_str(), m.library_module_id, m.breakdown.aggregate, m.mc,
                  m.combined, m.duplicate ? " (duplicate)" : "");
    out += line;
  }
  return out;
}

DetectionReport parse_machine_report(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
  try {
    if (doc.at("version").get<std::string>() != kReportFormatVersion) {
      throw std::invalid_argument("unsupported report version");
    }
    DetectionReport report;
    report.program_name = doc.at("program_name").get<std::string>();
    for (const json& v : doc.at("verdicts")) {
      report.verdicts.push_back({v.at("library_name").get<std::string>(), v.at("evidence").get<double>(),
                                 v.at("matched_module_count").get<std::size_t>(), v.at("detected").get<bool>()});
    }
    for (const json& m : doc.at("matches")) {
      ModuleMatch match;
      match.program_module_id = m.at("program_module_id").get<std::uint32_t>();
      match.library_name = m.at("library_name").get<std::string>();
      match.library_module_id = m.at("library_module_id").get<std::uint32_t>();
      match.breakdown = breakdown_from_json(m.at("similarity"));
      match.mc = m.at("mc").get<double>();
      match.combined = m.at("combined").get<double>();
      match.duplicate = m.at("duplicate").get<bool>();
      report.matches.push_back(std::move(match));
    }
    return report;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

}  // namespace modx

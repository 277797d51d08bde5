#pragma once

// Desk-scale detection fixtures shared by the unit and acceptance suites.
//
// The modularizer runs with ds_limit_divisor = 1: at a few hundred functions
// the default divisor caps a module's dispersion below what a contiguous
// module of 10-20 functions already has. Libraries are registered with
// ref_frequency 8 so that three matched modules clear the evidence threshold.

#include <algorithm>
#include <string>
#include <vector>

#include "modx/detector.hpp"
#include "modx/synthetic.hpp"
#include "modx/tpl_db.hpp"

namespace fixtures {

inline constexpr std::uint64_t kRefFrequency = 8;

inline modx::DetectionSettings desk_settings() {
  modx::DetectionSettings s;
  s.pipeline.modularizer.ds_limit_divisor = 1;
  return s;
}

struct LibrarySpec {
  const char* name;
  std::size_t modules;
  std::size_t min_size;
  std::size_t max_size;
  std::uint64_t seed;
};

// libcodec is the partial-import source: its modules stay small enough for a
// ~100-function target to keep them intact.
inline const std::vector<LibrarySpec>& library_specs() {
  static const std::vector<LibrarySpec> specs{
      {"libcodec", 16, 6, 14, 1},
      {"libcompress", 16, 8, 20, 100},
      {"libnet", 18, 10, 24, 101},
      {"libparse", 22, 6, 16, 102},
  };
  return specs;
}

struct Library {
  // `plant` holds the computed partition, i.e. the modules stored in the db.
  modx::synthetic::PlantedGraph graph;
  modx::LibrarySignature signature;
};

inline Library build_library(const LibrarySpec& spec, const modx::DetectionSettings& settings = desk_settings()) {
  modx::synthetic::LibraryParams params;
  params.name = spec.name;
  params.modules = spec.modules;
  params.min_module_size = spec.min_size;
  params.max_module_size = spec.max_size;
  params.seed = spec.seed;
  Library lib{modx::synthetic::library(params), {}};
  modx::Partition partition;
  lib.signature.library_name = spec.name;
  lib.signature.version = "1.0";
  lib.signature.ref_frequency = kRefFrequency;
  lib.signature.modules = modx::sign_program(lib.graph.graph, settings.pipeline, &partition);
  lib.graph.plant = partition.labels();
  return lib;
}

inline modx::SignatureDatabase make_db(const std::vector<const Library*>& libs) {
  modx::SignatureDatabase db;
  for (const Library* lib : libs) db.add_library(lib->signature);
  return db;
}

struct ImportOutcome {
  bool all_taken_matched = true;
  bool detected = false;
  std::size_t false_verdicts = 0;
  modx::DetectionReport report;
};

inline ImportOutcome run_partial_import(const Library& source, const modx::SignatureDatabase& db, std::uint64_t seed,
                                        std::size_t modules_taken, bool strip,
                                        const modx::DetectionSettings& settings = desk_settings()) {
  modx::synthetic::PartialImportParams params;
  params.seed = seed;
  params.modules_taken = modules_taken;
  params.strip_strings = strip;
  const auto target = modx::synthetic::partial_import(source.graph, params);
  ImportOutcome out;
  out.report = modx::detect(target.graph, db, settings);
  const std::string& name = source.signature.library_name;
  for (auto label : target.taken) {
    const bool hit = std::any_of(out.report.matches.begin(), out.report.matches.end(), [&](const auto& m) {
      return m.library_name == name && m.library_module_id == label;
    });
    out.all_taken_matched = out.all_taken_matched && hit;
  }
  for (const auto& v : out.report.verdicts) {
    if (v.library_name == name) out.detected = v.detected;
    else if (v.detected) ++out.false_verdicts;
  }
  return out;
}

}  // namespace fixtures

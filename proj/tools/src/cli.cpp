#include "modx/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modx/cli/config.hpp"
#include "modx/detector.hpp"
#include "modx/synthetic.hpp"

namespace modx::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Raised for problems with files named on the command line.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ProgramGraph read_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path);
  try {
    return load_program_graph(in);
  } catch (const GraphFormatError& e) {
    throw GraphFormatError(path + ": " + e.what());
  }
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw FileError("cannot write " + path);
  file << text;
}

// ---------------------------------------------------------------------------
// Flags shared by the pipeline subcommands. Precedence: flag > config > default.

struct PipelineFlags {
  std::string config_path;
  double c = 1.0;
  std::size_t ds_divisor = 100;
  double bias_cap = 3.0;
  bool no_biases = false;
  std::size_t max_merges = 0;
  std::string normalization;

  CLI::Option* config_opt = nullptr;
  CLI::Option* c_opt = nullptr;
  CLI::Option* ds_opt = nullptr;
  CLI::Option* cap_opt = nullptr;
  CLI::Option* biases_opt = nullptr;
  CLI::Option* merges_opt = nullptr;
  CLI::Option* norm_opt = nullptr;

  void attach(CLI::App* app) {
    config_opt = app->add_option("--config", config_path, "JSON config file (default: $MODX_CONFIG)");
    c_opt = app->add_option("--c", c, "volume propagation normalisation factor");
    ds_opt = app->add_option("--ds-divisor", ds_divisor, "dispersion limit = N / divisor");
    cap_opt = app->add_option("--bias-cap", bias_cap, "upper bound of the locality bias");
    biases_opt = app->add_flag("--no-biases", no_biases, "disable locality and entry biases");
    merges_opt = app->add_option("--max-merges", max_merges, "stop after this many merges (0 = no limit)");
    norm_opt = app->add_option("--normalization", normalization, "weighted MQ denominator: 2W (default) or W")
                   ->check(CLI::IsMember({"2W", "W"}));
  }

  GlobalConfig resolve() const {
    std::optional<std::string> flag;
    if (config_opt->count() > 0) flag = config_path;
    GlobalConfig config;
    if (auto path = resolve_config_path(flag)) config = load_config_file(*path);
    auto& m = config.pipeline.modularizer;
    if (c_opt->count() > 0) config.pipeline.propagation.c = c;
    if (ds_opt->count() > 0) m.ds_limit_divisor = ds_divisor;
    if (cap_opt->count() > 0) m.bias_cap = bias_cap;
    if (biases_opt->count() > 0 && no_biases) m.locality_bias = m.entry_bias = false;
    if (merges_opt->count() > 0) m.max_passes = max_merges;
    if (norm_opt->count() > 0) m.normalization = normalization == "W" ? MqNormalization::kPerW : MqNormalization::kLiteral2W;
    return config;
  }
};

struct DetectorFlags {
  double tau = 0.0;
  double delta = 0.0;
  double theta = 0.0;
  std::size_t top_k = 0;
  bool no_prefilter = false;
  CLI::Option* tau_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* top_k_opt = nullptr;
  CLI::Option* prefilter_opt = nullptr;

  void attach(CLI::App* app) {
    tau_opt = app->add_option("--tau", tau, "minimum aggregate similarity for a match");
    delta_opt = app->add_option("--delta", delta, "required lead over the runner-up candidate");
    theta_opt = app->add_option("--theta", theta, "minimum library evidence");
    top_k_opt = app->add_option("--top-k", top_k, "candidates ranked per program module");
    prefilter_opt = app->add_flag("--no-prefilter", no_prefilter, "score every database module");
  }

  void apply(DetectorConfig& d) const {
    if (tau_opt->count() > 0) d.tau_match = tau;
    if (delta_opt->count() > 0) d.margin = delta;
    if (theta_opt->count() > 0) d.theta_lib = theta;
    if (top_k_opt->count() > 0) d.top_k = top_k;
    if (prefilter_opt->count() > 0 && no_prefilter) d.prefilter = false;
  }
};

struct LibraryFlags {
  std::string meta_path;
  std::string name;
  std::string version;
  std::uint64_t ref_frequency = 1;
  CLI::Option* name_opt = nullptr;
  CLI::Option* version_opt = nullptr;
  CLI::Option* nu_opt = nullptr;
  CLI::Option* meta_opt = nullptr;

  void attach(CLI::App* app) {
    meta_opt = app->add_option("--meta", meta_path, "library metadata sidecar {name, version, ref_frequency}");
    name_opt = app->add_option("--lib-name", name, "library name (default: the graph's program name)");
    version_opt = app->add_option("--lib-version", version, "library version string");
    nu_opt = app->add_option("--ref-frequency", ref_frequency, "how often the library is referenced (default 1)");
  }

  LibraryMeta resolve(const ProgramGraph& graph) const {
    LibraryMeta meta{graph.program_name, "", 1};
    if (meta_opt->count() > 0) {
      json doc;
      try {
        doc = json::parse(read_file(meta_path));
        if (doc.contains("name")) meta.name = doc.at("name").get<std::string>();
        if (doc.contains("version")) meta.version = doc.at("version").get<std::string>();
        if (doc.contains("ref_frequency")) meta.ref_frequency = doc.at("ref_frequency").get<std::uint64_t>();
      } catch (const json::exception& e) {
        throw FileError(meta_path + ": " + e.what());
      }
    }
    if (name_opt->count() > 0) meta.name = name;
    if (version_opt->count() > 0) meta.version = version;
    if (nu_opt->count() > 0) meta.ref_frequency = ref_frequency;
    if (meta.name.empty()) throw std::invalid_argument("library name is empty; pass --lib-name");
    return meta;
  }
};

// ---------------------------------------------------------------------------

std::string seed_report(const ProgramGraph& graph, const WeightedGraph& weighted,
                        const std::vector<EliminationStep>& steps, const ModularizeResult& result) {
  ordered_json doc;
  doc["program_name"] = graph.program_name;
  ordered_json fv = ordered_json::object();
  for (std::size_t i = 0; i < graph.size(); ++i) fv[graph.function(i).id] = weighted.fv[i];
  doc["fv"] = std::move(fv);
  ordered_json eliminations = ordered_json::array();
  for (const auto& step : steps) {
    ordered_json ids = ordered_json::array();
    for (std::size_t v : step.nodes) ids.push_back(graph.function(v).id);
    eliminations.push_back(
        {{"kind", step.kind == EliminationStep::Kind::kCondense ? "condense" : "end-nodes"}, {"nodes", ids}});
  }
  doc["eliminations"] = std::move(eliminations);
  ordered_json merges = ordered_json::array();
  for (const auto& m : result.merges) {
    merges.push_back({{"first", graph.function(m.first).id},
                      {"second", graph.function(m.second).id},
                      {"base_gain", m.base_gain},
                      {"locality", m.locality},
                      {"entry", m.entry},
                      {"gain", m.gain}});
  }
  doc["merges"] = std::move(merges);
  return doc.dump(1) + "\n";
}

std::string breakdown_text(const SimilarityBreakdown& b) {
  std::string out;
  char line[128];
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto name = std::string(to_string(static_cast<Channel>(c)));
    if (b.channel[c]) {
      std::snprintf(line, sizeof line, "%-12s %.6f\n", name.c_str(), *b.channel[c]);
    } else {
      std::snprintf(line, sizeof line, "%-12s inactive\n", name.c_str());
    }
    out += line;
  }
  std::snprintf(line, sizeof line, "%-12s %.6f\n", "aggregate", b.aggregate);
  return out + line;
}

const ModuleSignature& find_module(const LibrarySignature& lib, std::uint32_t id, const std::string& path) {
  for (const auto& m : lib.modules) {
    if (m.module_id == id) return m;
  }
  throw std::invalid_argument(path + " has no module " + std::to_string(id));
}

}  // namespace

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Call-graph modularization and third-party library detection", "modx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "modx 0.1.0");

  std::function<void()> action;

  // modularize --------------------------------------------------------------
  auto* modularize_cmd = app.add_subcommand("modularize", "partition a call graph into modules (mpt-1)");
  std::string mod_graph, mod_out, mod_seed;
  bool mod_quality = false;
  PipelineFlags mod_flags;
  modularize_cmd->add_option("graph", mod_graph, "mgx-1 graph document")->required();
  modularize_cmd->add_option("-o,--out", mod_out, "output path (default: stdout)");
  modularize_cmd->add_option("--seed-report", mod_seed, "write FV values, eliminations and merges as JSON");
  modularize_cmd->add_flag("--quality", mod_quality, "embed the quality report in the output document");
  mod_flags.attach(modularize_cmd);
  modularize_cmd->callback([&] {
    action = [&] {
      const GlobalConfig config = mod_flags.resolve();
      config.validate();
      const ProgramGraph graph = read_graph(mod_graph);
      std::vector<EliminationStep> steps;
      const WeightedGraph weighted = propagate_volumes(graph, config.pipeline.propagation, &steps);
      const ModularizeResult result = modularize_with_trace(weighted, config.pipeline.modularizer);
      std::string doc = serialize_partition(graph, result.partition);
      if (mod_quality) {
        ordered_json parsed = ordered_json::parse(doc);
        parsed["quality"] = ordered_json::parse(
            quality_report_json(evaluate_quality(weighted, result.partition, config.pipeline.modularizer.normalization)));
        doc = parsed.dump(1) + "\n";
      }
      if (!mod_seed.empty()) emit(mod_seed, seed_report(graph, weighted, steps, result), out);
      emit(mod_out, doc, out);
    };
  });

  // metrics -----------------------------------------------------------------
  auto* metrics_cmd = app.add_subcommand("metrics", "module quality metrics for a partition");
  std::string met_graph, met_partition, met_labels, met_format = "text";
  PipelineFlags met_flags;
  metrics_cmd->add_option("graph", met_graph, "mgx-1 graph document")->required();
  metrics_cmd->add_option("--partition", met_partition, "mpt-1 partition (default: modularize the graph)");
  metrics_cmd->add_option("--labels", met_labels, "reference mpt-1 partition for the overlap score");
  metrics_cmd->add_option("--format", met_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  met_flags.attach(metrics_cmd);
  metrics_cmd->callback([&] {
    action = [&] {
      const GlobalConfig config = met_flags.resolve();
      config.validate();
      const ProgramGraph graph = read_graph(met_graph);
      const WeightedGraph weighted = propagate_volumes(graph, config.pipeline.propagation);
      const Partition partition = met_partition.empty() ? modularize(weighted, config.pipeline.modularizer)
                                                        : parse_partition(graph, read_file(met_partition));
      const QualityReport report = evaluate_quality(weighted, partition, config.pipeline.modularizer.normalization);
      std::optional<double> overlap;
      if (!met_labels.empty()) overlap = overlap_score(partition, parse_partition(graph, read_file(met_labels)));
      if (met_format == "json") {
        ordered_json doc = ordered_json::parse(quality_report_json(report));
        doc["module_count"] = partition.module_count();
        if (overlap) doc["overlap_score"] = *overlap;
        out << doc.dump(1) << "\n";
      } else {
        out << quality_report_text(report);
        char line[64];
        std::snprintf(line, sizeof line, "%-24s %zu\n", "module_count", partition.module_count());
        out << line;
        if (overlap) {
          std::snprintf(line, sizeof line, "%-24s %.6f\n", "overlap_score", *overlap);
          out << line;
        }
      }
    };
  });

  // sign --------------------------------------------------------------------
  auto* sign_cmd = app.add_subcommand("sign", "write the module signatures of a graph (msig-1)");
  std::string sign_graph, sign_out;
  PipelineFlags sign_flags;
  LibraryFlags sign_lib;
  sign_cmd->add_option("graph", sign_graph, "mgx-1 graph document")->required();
  sign_cmd->add_option("-o,--out", sign_out, "output path (default: stdout)");
  sign_flags.attach(sign_cmd);
  sign_lib.attach(sign_cmd);
  sign_cmd->callback([&] {
    action = [&] {
      const GlobalConfig config = sign_flags.resolve();
      config.validate();
      const ProgramGraph graph = read_graph(sign_graph);
      const LibraryMeta meta = sign_lib.resolve(graph);
      emit(sign_out, serialize_library_signature(build_library_signature(graph, meta, config.pipeline)), out);
    };
  });

  // build-db ----------------------------------------------------------------
  auto* build_cmd = app.add_subcommand("build-db", "add a library graph to a signature database (mdb-1)");
  std::string build_graph, build_out;
  PipelineFlags build_flags;
  LibraryFlags build_lib;
  build_cmd->add_option("graph", build_graph, "mgx-1 graph of the library")->required();
  build_cmd->add_option("--out", build_out, "database directory (created or extended)")->required();
  build_flags.attach(build_cmd);
  build_lib.attach(build_cmd);
  build_cmd->callback([&] {
    action = [&] {
      const GlobalConfig config = build_flags.resolve();
      config.validate();
      const ProgramGraph graph = read_graph(build_graph);
      const LibraryMeta meta = build_lib.resolve(graph);
      SignatureDatabase db;
      if (fs::exists(fs::path(build_out) / "corpus.json")) db = load_db(build_out);
      LibrarySignature lib = build_library_signature(graph, meta, config.pipeline);
      const std::size_t modules = lib.module_count();
      const double li = lib.importance();
      db.add_library(std::move(lib));
      save_db(db, build_out);
      char line[256];
      std::snprintf(line, sizeof line, "%s: %zu modules, LI=%.6f; database holds %zu libraries, %zu modules\n",
                    meta.name.c_str(), modules, li, db.libraries().size(), db.total_modules());
      out << line;
    };
  });

  // detect ------------------------------------------------------------------
  auto* detect_cmd = app.add_subcommand("detect", "match a program against a signature database");
  std::string det_graph, det_db, det_report = "text", det_out;
  PipelineFlags det_flags;
  DetectorFlags det_thresholds;
  detect_cmd->add_option("graph", det_graph, "mgx-1 graph of the target program")->required();
  detect_cmd->add_option("--db", det_db, "database directory")->required();
  detect_cmd->add_option("--report", det_report, "text or machine (mrep-1)");
  detect_cmd->add_option("-o,--out", det_out, "output path (default: stdout)");
  det_flags.attach(detect_cmd);
  det_thresholds.attach(detect_cmd);
  detect_cmd->callback([&] {
    action = [&] {
      GlobalConfig config = det_flags.resolve();
      det_thresholds.apply(config.detector);
      config.validate();
      const ReportFormat format = parse_report_format(det_report);
      const ProgramGraph graph = read_graph(det_graph);
      const SignatureDatabase db = load_db(det_db);
      emit(det_out, render_report(detect(graph, db, config.detection()), format), out);
    };
  });

  // compare-modules ---------------------------------------------------------
  auto* compare_cmd = app.add_subcommand("compare-modules", "similarity breakdown of two module signatures");
  std::string cmp_a, cmp_b, cmp_db, cmp_format = "text", cmp_config;
  std::uint32_t cmp_ma = 0, cmp_mb = 0;
  compare_cmd->add_option("a", cmp_a, "msig-1 document")->required();
  compare_cmd->add_option("b", cmp_b, "msig-1 document")->required();
  compare_cmd->add_option("--module-a", cmp_ma, "module id in the first document (default 0)");
  compare_cmd->add_option("--module-b", cmp_mb, "module id in the second document (default 0)");
  compare_cmd->add_option("--db", cmp_db, "take constant document frequencies from this database");
  compare_cmd->add_option("--format", cmp_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  auto* cmp_config_opt = compare_cmd->add_option("--config", cmp_config, "JSON config file (default: $MODX_CONFIG)");
  compare_cmd->callback([&] {
    action = [&] {
      std::optional<std::string> flag;
      if (cmp_config_opt->count() > 0) flag = cmp_config;
      GlobalConfig config;
      if (auto path = resolve_config_path(flag)) config = load_config_file(*path);
      config.validate();
      auto parse = [](const std::string& path) {
        try {
          return parse_library_signature(read_file(path));
        } catch (const DatabaseError& e) {
          throw DatabaseError(path + ": " + e.what());
        }
      };
      const LibrarySignature a = parse(cmp_a);
      const LibrarySignature b = parse(cmp_b);
      CorpusStats stats;
      if (!cmp_db.empty()) {
        stats = load_db(cmp_db).corpus_stats();
      } else {
        std::vector<const ModuleSignature*> all;
        for (const auto& m : a.modules) all.push_back(&m);
        for (const auto& m : b.modules) all.push_back(&m);
        stats = CorpusStats::from_modules(all);
      }
      const SimilarityBreakdown result =
          aggregate(find_module(a, cmp_ma, cmp_a), find_module(b, cmp_mb, cmp_b), stats, config.weights);
      if (cmp_format == "json") {
        ordered_json doc;
        for (std::size_t c = 0; c < kChannelCount; ++c) {
          const auto name = std::string(to_string(static_cast<Channel>(c)));
          doc["channels"][name] = result.channel[c] ? ordered_json(*result.channel[c]) : ordered_json(nullptr);
        }
        doc["aggregate"] = result.aggregate;
        out << doc.dump(1) << "\n";
      } else {
        out << breakdown_text(result);
      }
    };
  });

  // gen-fixture -------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("gen-fixture", "write a deterministic synthetic graph (mgx-1)");
  std::string gen_kind, gen_out, gen_lib_out, gen_name = "libsynth";
  std::uint64_t gen_seed = 7;
  synthetic::PlantedParams planted_params;
  synthetic::LibraryParams library_params;
  synthetic::PartialImportParams partial_params;
  PipelineFlags gen_flags;
  gen_cmd->add_option("kind", gen_kind, "planted | clique-pair | library | library-with-noise")
      ->required()
      ->check(CLI::IsMember({"planted", "clique-pair", "library", "library-with-noise"}));
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("-o,--out", gen_out, "output path (default: stdout)");
  gen_cmd->add_option("--blocks", planted_params.blocks, "planted: number of blocks");
  gen_cmd->add_option("--block-size", planted_params.block_size, "planted: functions per block");
  gen_cmd->add_option("--p-in", planted_params.p_in, "planted: intra-block call probability");
  gen_cmd->add_option("--p-out", planted_params.p_out, "planted: inter-block call probability");
  gen_cmd->add_option("--name", gen_name, "library: program name");
  gen_cmd->add_option("--modules", library_params.modules, "library: module count");
  gen_cmd->add_option("--min-size", library_params.min_module_size, "library: smallest module");
  gen_cmd->add_option("--max-size", library_params.max_module_size, "library: largest module");
  gen_cmd->add_option("--library-seed", library_params.seed, "library-with-noise: seed of the source library");
  gen_cmd->add_option("--take", partial_params.modules_taken, "library-with-noise: library modules copied");
  gen_cmd->add_option("--noise", partial_params.noise_functions, "library-with-noise: noise functions added");
  gen_cmd->add_flag("--strip-strings", partial_params.strip_strings, "library-with-noise: drop all string literals");
  gen_cmd->add_option("--library-out", gen_lib_out, "library-with-noise: also write the source library graph");
  gen_flags.attach(gen_cmd);
  gen_cmd->callback([&] {
    action = [&] {
      ProgramGraph graph;
      library_params.name = gen_name;
      if (gen_kind == "planted") {
        planted_params.seed = gen_seed;
        graph = synthetic::planted(planted_params).graph;
      } else if (gen_kind == "clique-pair") {
        graph = synthetic::clique_pair();
      } else if (gen_kind == "library") {
        library_params.seed = gen_seed;
        graph = synthetic::library(library_params).graph;
      } else {
        // Modules are cut along the library's own computed partition, which
        // is what a database built from the library would hold.
        const GlobalConfig config = gen_flags.resolve();
        config.validate();
        synthetic::PlantedGraph lib = synthetic::library(library_params);
        Partition partition;
        sign_program(lib.graph, config.pipeline, &partition);
        lib.plant = partition.labels();
        partial_params.seed = gen_seed;
        graph = synthetic::partial_import(lib, partial_params).graph;
        if (!gen_lib_out.empty()) emit(gen_lib_out, serialize_program_graph(lib.graph), out);
      }
      emit(gen_out, serialize_program_graph(graph), out);
    };
  });

  // show-config -------------------------------------------------------------
  auto* show_cmd = app.add_subcommand("show-config", "print the effective configuration");
  PipelineFlags show_flags;
  DetectorFlags show_thresholds;
  show_flags.attach(show_cmd);
  show_thresholds.attach(show_cmd);
  show_cmd->callback([&] {
    action = [&] {
      GlobalConfig config = show_flags.resolve();
      show_thresholds.apply(config.detector);
      config.validate();
      out << config_to_json(config);
    };
  });

  std::vector<const char*> argv;
  argv.push_back("modx");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    err << "modx: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "modx: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace modx::cli

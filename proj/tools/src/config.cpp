#include "modx/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace modx::cli {

using nlohmann::json;

void GlobalConfig::validate() const {
  if (!(pipeline.propagation.c > 0.0)) throw std::invalid_argument("propagation.c must be > 0");
  pipeline.modularizer.validate();
  pipeline.features.validate();
  weights.validate();
  detector.validate();
}

namespace {

template <typename T>
void take(const json& section, const std::string& where, const char* key, T& target) {
  auto it = section.find(key);
  if (it == section.end()) return;
  try {
    target = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void reject_unknown(const json& section, const std::string& where, std::initializer_list<const char*> known) {
  if (!section.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : section.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

MqNormalization parse_normalization(const std::string& name) {
  if (name == "2W") return MqNormalization::kLiteral2W;
  if (name == "W") return MqNormalization::kPerW;
  throw ConfigError("modularizer.normalization: expected \"2W\" or \"W\"");
}

}  // namespace

void apply_config_document(GlobalConfig& config, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  reject_unknown(doc, "config", {"propagation", "modularizer", "features", "weights", "detector"});

  if (auto it = doc.find("propagation"); it != doc.end()) {
    reject_unknown(*it, "propagation", {"c"});
    take(*it, "propagation", "c", config.pipeline.propagation.c);
  }
  if (auto it = doc.find("modularizer"); it != doc.end()) {
    auto& m = config.pipeline.modularizer;
    reject_unknown(*it, "modularizer", {"ds_limit_divisor", "bias_cap", "max_passes", "epsilon", "locality_bias",
                                        "entry_bias", "normalization"});
    take(*it, "modularizer", "ds_limit_divisor", m.ds_limit_divisor);
    take(*it, "modularizer", "bias_cap", m.bias_cap);
    take(*it, "modularizer", "max_passes", m.max_passes);
    take(*it, "modularizer", "epsilon", m.epsilon);
    take(*it, "modularizer", "locality_bias", m.locality_bias);
    take(*it, "modularizer", "entry_bias", m.entry_bias);
    std::string norm;
    take(*it, "modularizer", "normalization", norm);
    if (!norm.empty()) m.normalization = parse_normalization(norm);
  }
  if (auto it = doc.find("features"); it != doc.end()) {
    auto& f = config.pipeline.features;
    reject_unknown(*it, "features", {"min_string_len", "kernel_iterations", "kernel_bin_width"});
    take(*it, "features", "min_string_len", f.min_string_len);
    take(*it, "features", "kernel_iterations", f.kernel_iterations);
    take(*it, "features", "kernel_bin_width", f.kernel_bin_width);
  }
  if (auto it = doc.find("weights"); it != doc.end()) {
    auto& w = config.weights;
    reject_unknown(*it, "weights", {"strings", "constants", "kernel", "edges", "functions"});
    take(*it, "weights", "strings", w.strings);
    take(*it, "weights", "constants", w.constants);
    take(*it, "weights", "kernel", w.kernel);
    take(*it, "weights", "edges", w.edges);
    take(*it, "weights", "functions", w.functions);
  }
  if (auto it = doc.find("detector"); it != doc.end()) {
    auto& d = config.detector;
    reject_unknown(*it, "detector", {"tau_match", "margin", "theta_lib", "top_k", "prefilter"});
    take(*it, "detector", "tau_match", d.tau_match);
    take(*it, "detector", "margin", d.margin);
    take(*it, "detector", "theta_lib", d.theta_lib);
    take(*it, "detector", "top_k", d.top_k);
    take(*it, "detector", "prefilter", d.prefilter);
  }
}

GlobalConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  GlobalConfig config;
  try {
    apply_config_document(config, buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config;
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return std::filesystem::path(*flag);
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

std::string config_to_json(const GlobalConfig& config) {
  const auto& m = config.pipeline.modularizer;
  const auto& f = config.pipeline.features;
  const auto& w = config.weights;
  const auto& d = config.detector;
  nlohmann::ordered_json doc;
  doc["propagation"] = {{"c", config.pipeline.propagation.c}};
  doc["modularizer"] = {{"ds_limit_divisor", m.ds_limit_divisor},
                        {"bias_cap", m.bias_cap},
                        {"max_passes", m.max_passes},
                        {"epsilon", m.epsilon},
                        {"locality_bias", m.locality_bias},
                        {"entry_bias", m.entry_bias},
                        {"normalization", m.normalization == MqNormalization::kPerW ? "W" : "2W"}};
  doc["features"] = {{"min_string_len", f.min_string_len},
                     {"kernel_iterations", f.kernel_iterations},
                     {"kernel_bin_width", f.kernel_bin_width}};
  doc["weights"] = {{"strings", w.strings},
                    {"constants", w.constants},
                    {"kernel", w.kernel},
                    {"edges", w.edges},
                    {"functions", w.functions}};
  doc["detector"] = {{"tau_match", d.tau_match},
                     {"margin", d.margin},
                     {"theta_lib", d.theta_lib},
                     {"top_k", d.top_k},
                     {"prefilter", d.prefilter}};
  return doc.dump(2) + "\n";
}

}  // namespace modx::cli

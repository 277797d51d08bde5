#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "modx/detector.hpp"

namespace modx::cli {

// Name of the environment variable holding a default config path.
inline constexpr const char* kConfigEnv = "MODX_CONFIG";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every tunable of the pipeline in one place.
struct GlobalConfig {
  PipelineConfig pipeline;
  ChannelWeights weights;
  DetectorConfig detector;

  DetectionSettings detection() const { return {pipeline, weights, detector}; }
  // Throws std::invalid_argument naming the offending section.
  void validate() const;
};

// Overlays the keys present in a JSON config document onto `config`.
// Unknown sections or keys are rejected so typos do not go unnoticed.
void apply_config_document(GlobalConfig& config, std::string_view text);
GlobalConfig load_config_file(const std::filesystem::path& path);

// Explicit path wins over the environment variable; neither means defaults.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag);

std::string config_to_json(const GlobalConfig& config);

}  // namespace modx::cli

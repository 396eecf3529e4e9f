#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "depthpatch/defenses.hpp"
#include "depthpatch/optimizer.hpp"

namespace depthpatch {

inline constexpr int kConfigSchemaVersion = 1;

/// Everything a run needs. Serialises to a `key = value` text file; see
/// README for the key list.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string model = "toy";
  std::filesystem::path data_dir;          // empty: synthetic scenes
  std::string layout = "flat";             // flat | paired
  std::string natural_image = "synthetic"; // path or "synthetic"
  int synthetic_scenes = 8;
  AttackConfig attack{};
  std::vector<double> eval_scales{0.05};
  std::vector<Defense> defenses{Defense{}};
  int eval_placements = 1;
  std::string eval_reference = "benign";   // benign | clean
  double affected_threshold = 0.1;
  int checkpoint_every = 0;
  std::filesystem::path output_dir = "runs/latest";
  std::uint64_t seed = 0;

  /// Throws ConfigError; `check_paths` also requires referenced paths.
  void validate(bool check_paths = true) const;

  std::string to_text() const;
  std::string hash() const;
};

/// Parse `key = value` lines; `#` starts a comment. Unknown keys and
/// malformed values raise ConfigError naming the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Apply one key/value pair (used by the parser and by CLI overrides).
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

}  // namespace depthpatch

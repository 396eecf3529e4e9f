#include "depthpatch/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "depthpatch/errors.hpp"
#include "depthpatch/image.hpp"
#include "depthpatch/image_io.hpp"

namespace depthpatch {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects an unsigned integer, got '" + v + "'");
  }
  return out;
}

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

}  // namespace

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  AttackConfig& a = c.attack;
  TransformRanges& t = a.transforms;
  if (key == "schema_version") {
    c.schema_version = static_cast<int>(to_int(key, v));
    if (c.schema_version != kConfigSchemaVersion) {
      throw ConfigError("unsupported schema_version " + v);
    }
  } else if (key == "model") c.model = v;
  else if (key == "data_dir") c.data_dir = v;
  else if (key == "layout") c.layout = v;
  else if (key == "natural_image") c.natural_image = v;
  else if (key == "synthetic_scenes") c.synthetic_scenes = static_cast<int>(to_int(key, v));
  else if (key == "epochs") a.epochs = static_cast<int>(to_int(key, v));
  else if (key == "batch") a.batch = static_cast<int>(to_int(key, v));
  else if (key == "learning_rate") a.learning_rate = to_double(key, v);
  else if (key == "adam_beta1") a.adam_beta1 = to_double(key, v);
  else if (key == "adam_beta2") a.adam_beta2 = to_double(key, v);
  else if (key == "adam_epsilon") a.adam_epsilon = to_double(key, v);
  else if (key == "epsilon") a.epsilon = to_double(key, v);
  else if (key == "alpha") a.alpha = to_double(key, v);
  else if (key == "beta") a.beta = to_double(key, v);
  else if (key == "mode") {
    if (v == "untargeted") a.mode = AttackMode::Untargeted;
    else if (v == "targeted") a.mode = AttackMode::Targeted;
    else throw ConfigError("mode must be targeted or untargeted, got '" + v + "'");
  } else if (key == "target_depth_c") a.target_depth_c = to_double(key, v);
  else if (key == "patch_scale") a.patch_scale = to_double(key, v);
  else if (key == "rng_seed") a.rng_seed = to_u64(key, v);
  else if (key == "tv_reduction") {
    if (v == "mean") a.tv_reduction = TvReduction::Mean;
    else if (v == "sum") a.tv_reduction = TvReduction::Sum;
    else throw ConfigError("tv_reduction must be mean or sum, got '" + v + "'");
  } else if (key == "noise") t.noise = to_double(key, v);
  else if (key == "rotation_deg") t.rotation_deg = to_double(key, v);
  else if (key == "brightness") t.brightness = to_double(key, v);
  else if (key == "contrast_min") t.contrast_min = to_double(key, v);
  else if (key == "contrast_max") t.contrast_max = to_double(key, v);
  else if (key == "crop_min") t.crop_min = to_double(key, v);
  else if (key == "crop_max") t.crop_max = to_double(key, v);
  else if (key == "affine") t.affine = to_double(key, v);
  else if (key == "scale_min") t.scale_min = to_double(key, v);
  else if (key == "scale_max") t.scale_max = to_double(key, v);
  else if (key == "eval_scales") {
    c.eval_scales.clear();
    for (const auto& item : split_list(v)) c.eval_scales.push_back(to_double(key, item));
  } else if (key == "defenses") {
    c.defenses.clear();
    for (const auto& item : split_list(v)) c.defenses.push_back(Defense::parse(item));
  } else if (key == "eval_placements") c.eval_placements = static_cast<int>(to_int(key, v));
  else if (key == "eval_reference") c.eval_reference = v;
  else if (key == "affected_threshold") c.affected_threshold = to_double(key, v);
  else if (key == "checkpoint_every") c.checkpoint_every = static_cast<int>(to_int(key, v));
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "seed") c.seed = to_u64(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

void ExperimentConfig::validate(bool check_paths) const {
  attack.validate();
  if (schema_version != kConfigSchemaVersion) throw ConfigError("unsupported schema_version");
  if (model.empty()) throw ConfigError("model must be set");
  if (layout != "flat" && layout != "paired") throw ConfigError("layout must be flat or paired");
  if (synthetic_scenes < 1) throw ConfigError("synthetic_scenes must be positive");
  if (eval_scales.empty()) throw ConfigError("eval_scales must not be empty");
  for (double s : eval_scales) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("eval_scales entries must be in (0,1]");
  }
  if (defenses.empty()) throw ConfigError("defenses must not be empty (use none)");
  if (eval_placements < 1) throw ConfigError("eval_placements must be positive");
  if (eval_reference != "benign" && eval_reference != "clean") {
    throw ConfigError("eval_reference must be benign or clean");
  }
  if (!(affected_threshold >= 0.0)) throw ConfigError("affected_threshold must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (check_paths) {
    if (!data_dir.empty() && !std::filesystem::is_directory(data_dir)) {
      throw ConfigError("data_dir does not exist: " + data_dir.string());
    }
    if (natural_image != "synthetic" && !std::filesystem::is_regular_file(natural_image)) {
      throw ConfigError("natural_image does not exist: " + natural_image);
    }
  }
}

std::string ExperimentConfig::to_text() const {
  const AttackConfig& a = attack;
  const TransformRanges& t = a.transforms;
  std::ostringstream o;
  std::string scales, defs;
  for (double s : eval_scales) scales += (scales.empty() ? "" : ",") + fmt(s);
  for (const Defense& d : defenses) {
    defs += defs.empty() ? "" : ",";
    defs += d.kind == DefenseKind::None ? "none" : d.name() + ":" + fmt(d.parameter);
  }
  o << "schema_version = " << schema_version << "\n"
    << "model = " << model << "\n"
    << "data_dir = " << data_dir.string() << "\n"
    << "layout = " << layout << "\n"
    << "natural_image = " << natural_image << "\n"
    << "synthetic_scenes = " << synthetic_scenes << "\n"
    << "epochs = " << a.epochs << "\n"
    << "batch = " << a.batch << "\n"
    << "learning_rate = " << fmt(a.learning_rate) << "\n"
    << "adam_beta1 = " << fmt(a.adam_beta1) << "\n"
    << "adam_beta2 = " << fmt(a.adam_beta2) << "\n"
    << "adam_epsilon = " << fmt(a.adam_epsilon) << "\n"
    << "epsilon = " << fmt(a.epsilon) << "\n"
    << "alpha = " << fmt(a.alpha) << "\n"
    << "beta = " << fmt(a.beta) << "\n"
    << "mode = " << (a.mode == AttackMode::Targeted ? "targeted" : "untargeted") << "\n"
    << "target_depth_c = " << fmt(a.target_depth_c) << "\n"
    << "patch_scale = " << fmt(a.patch_scale) << "\n"
    << "rng_seed = " << a.rng_seed << "\n"
    << "tv_reduction = " << (a.tv_reduction == TvReduction::Mean ? "mean" : "sum") << "\n"
    << "noise = " << fmt(t.noise) << "\n"
    << "rotation_deg = " << fmt(t.rotation_deg) << "\n"
    << "brightness = " << fmt(t.brightness) << "\n"
    << "contrast_min = " << fmt(t.contrast_min) << "\n"
    << "contrast_max = " << fmt(t.contrast_max) << "\n"
    << "crop_min = " << fmt(t.crop_min) << "\n"
    << "crop_max = " << fmt(t.crop_max) << "\n"
    << "affine = " << fmt(t.affine) << "\n"
    << "scale_min = " << fmt(t.scale_min) << "\n"
    << "scale_max = " << fmt(t.scale_max) << "\n"
    << "eval_scales = " << scales << "\n"
    << "defenses = " << defs << "\n"
    << "eval_placements = " << eval_placements << "\n"
    << "eval_reference = " << eval_reference << "\n"
    << "affected_threshold = " << fmt(affected_threshold) << "\n"
    << "checkpoint_every = " << checkpoint_every << "\n"
    << "output_dir = " << output_dir.string() << "\n"
    << "seed = " << seed << "\n";
  return o.str();
}

std::string ExperimentConfig::hash() const {
  const std::string text = to_text();
  // output_dir does not change results, so it stays out of the hash.
  std::string stable;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("output_dir", 0) == 0) continue;
    stable += line + "\n";
  }
  return hex64(fnv1a_bytes(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(stable.data()), stable.size())));
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  int number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::vector<unsigned char> bytes;
  try {
    bytes = read_file(path);
  } catch (const UnreadableFile& e) {
    throw ConfigError(e.what());
  }
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

}  // namespace depthpatch

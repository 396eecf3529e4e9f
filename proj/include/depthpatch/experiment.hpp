#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depthpatch/config.hpp"
#include "depthpatch/depth_model.hpp"
#include "depthpatch/baselines.hpp"
#include "depthpatch/optimizer.hpp"
#include "depthpatch/report.hpp"

namespace depthpatch {

struct SceneCatalog {
  struct Entry {
    std::string identifier;
    std::filesystem::path image_path;
    std::optional<std::filesystem::path> depth_path;
  };
  std::vector<Entry> entries;
  std::vector<Scene> scenes;          // loaded, resized, in [0,1]
  std::vector<std::string> warnings;  // unreadable files, unpaired depth, ...
  std::string pairing_rule;
};

/// Load every decodable image under `data_dir`.
///   flat:   all *.png / *.jpg / *.jpeg in the directory, no depth
///   paired: rgb/<id>.png with optional depth/<id>.png (16-bit, millimetres)
/// Images are resized to `target`. EmptyDataset when nothing loads; bad
/// files are listed in `warnings`.
SceneCatalog ingest(const std::filesystem::path& data_dir, const std::string& layout, Size target);

/// Where a patch is evaluated: same placement for the benign and the
/// attacked pattern.
enum class EvalReference { Benign, Clean };

struct EvalCell {
  double E_d = 0.0;
  double R_a = 0.0;
  std::vector<SceneBreakdown> per_scene;
  /// E_d between the model on the defended clean image and on the clean image.
  double benign_degradation = 0.0;
  /// Per scene, after the defense: reference and attacked predictions.
  std::vector<DepthMap> reference_depth;
  std::vector<DepthMap> attacked_depth;
};

/// Paste `pattern` (identity transform, base side from `scale`) into each
/// scene at placements drawn from `placement_seed`, apply `defense`, and
/// compare against the reference prediction over the pasted footprint.
EvalCell evaluate_pattern(const DepthModel& model, const std::vector<Scene>& scenes,
                          const Image& natural_base, const Image& pattern, double scale,
                          std::uint64_t placement_seed, const Defense& defense,
                          EvalReference reference, double threshold);

/// Placements (top-left corners) used by evaluate_pattern for a seed.
std::vector<Rect> eval_placements(const std::vector<Scene>& scenes, double scale,
                                  std::uint64_t placement_seed);

/// Scenes for a config: ingested from data_dir or synthetic.
std::vector<Scene> load_scenes(const ExperimentConfig& config, const DepthModel& model,
                               std::vector<std::string>* warnings = nullptr);
Image load_natural_base(const ExperimentConfig& config);

/// Standard file names inside an output directory.
struct RunFiles {
  std::filesystem::path dir;
  std::filesystem::path patch_png() const { return dir / "patch.png"; }
  std::filesystem::path sidecar() const { return dir / "patch.json"; }
  std::filesystem::path loss_csv() const { return dir / "loss.csv"; }
  std::filesystem::path report_csv() const { return dir / "report.csv"; }
  std::filesystem::path report_json() const { return dir / "report.json"; }
  std::filesystem::path config_copy() const { return dir / "config.txt"; }
  std::filesystem::path visual(const std::string& scene) const {
    return dir / ("depth_" + scene + ".png");
  }
};

struct AttackRun {
  AttackResult result;
  AttackReport report;
  RunFiles files;
};

/// Optimize a patch, evaluate it on the training scenes, and write the
/// patch, loss history, report and visualisations to config.output_dir.
AttackRun run_attack(const ExperimentConfig& config, const OptimizeHooks& hooks = {});

/// Evaluate a saved patch across config.eval_scales x placements x
/// defenses. Writes report.csv / report.json / visualisations into
/// config.output_dir.
AttackReport run_eval(const std::filesystem::path& patch_png, const std::filesystem::path& sidecar,
                      const ExperimentConfig& config);

enum class BaselineKind { Fgsm, MiFgsm, Random };
BaselineKind parse_baseline(const std::string& name);

/// Pixel baselines write adversarial images plus a report; `random` writes
/// the budget-matched random patch and evaluates it like run_eval.
AttackReport run_baseline(BaselineKind kind, const ExperimentConfig& config,
                          const PixelAttackConfig& pixel = {});

std::string loss_history_csv(const LossHistory& history);

/// The config as a flat JSON object of its key/value pairs.
nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace depthpatch

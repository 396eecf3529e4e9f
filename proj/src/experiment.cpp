#include "depthpatch/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "depthpatch/errors.hpp"
#include "depthpatch/image_io.hpp"
#include "depthpatch/metrics.hpp"
#include "depthpatch/persistence.hpp"
#include "depthpatch/synthetic.hpp"
#include "depthpatch/transform.hpp"
#include "depthpatch/visualize.hpp"

namespace depthpatch {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_image_file(const fs::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

DepthMap resize_depth(const DepthMap& depth, Size target) {
  if (depth.height() == target.height && depth.width() == target.width) return depth;
  Image plane(depth.height(), depth.width(), 1);
  std::copy(depth.values().begin(), depth.values().end(), plane.values().begin());
  const Image resized = resize(plane, target);
  DepthMap out(target.height, target.width, 0.0, depth.units());
  std::copy(resized.values().begin(), resized.values().end(), out.values().begin());
  return out;
}

std::string short_hash(const std::string& hash) { return hash.substr(0, 12); }

std::string mode_name(AttackMode mode) {
  return mode == AttackMode::Targeted ? "targeted" : "untargeted";
}

EvalReference parse_reference(const std::string& name) {
  return name == "clean" ? EvalReference::Clean : EvalReference::Benign;
}

// Per-scene seed for stochastic defenses; shared by the attacked and the
// reference image so both see the same noise field.
std::uint64_t defense_seed(std::uint64_t placement_seed, std::size_t scene) {
  Rng rng(placement_seed * 0x9e3779b97f4a7c15ull + scene + 1);
  return rng.fork_seed();
}

}  // namespace

SceneCatalog ingest(const fs::path& data_dir, const std::string& layout, Size target) {
  if (!fs::is_directory(data_dir)) throw UnreadableFile("not a directory: " + data_dir.string());
  SceneCatalog catalog;
  fs::path rgb_dir = data_dir;
  if (layout == "paired") {
    rgb_dir = data_dir / "rgb";
    catalog.pairing_rule = "rgb/<id>.{png,jpg} with depth/<id>.png (16-bit millimetres)";
    if (!fs::is_directory(rgb_dir)) throw EmptyDataset("paired layout needs " + rgb_dir.string());
  } else if (layout == "flat") {
    catalog.pairing_rule = "flat directory, no depth";
  } else {
    throw ConfigError("layout must be flat or paired");
  }

  std::set<std::string> seen;
  for (const fs::path& path : sorted_images(rgb_dir)) {
    const std::string id = path.stem().string();
    if (!seen.insert(id).second) {
      catalog.warnings.push_back("duplicate identifier '" + id + "', skipped " + path.string());
      continue;
    }
    SceneCatalog::Entry entry{id, path, std::nullopt};
    Scene scene;
    scene.identifier = id;
    try {
      scene.image = resize(read_image(path), target);
    } catch (const Error& e) {
      catalog.warnings.push_back(path.string() + ": " + e.what());
      continue;
    }
    if (layout == "paired") {
      const fs::path depth_path = data_dir / "depth" / (id + ".png");
      if (fs::is_regular_file(depth_path)) {
        try {
          scene.reference_depth = resize_depth(read_depth_png(depth_path, 1.0 / 1000.0), target);
          entry.depth_path = depth_path;
        } catch (const Error& e) {
          catalog.warnings.push_back(depth_path.string() + ": " + e.what());
        }
      } else {
        catalog.warnings.push_back("no depth for '" + id + "'");
      }
    }
    catalog.entries.push_back(std::move(entry));
    catalog.scenes.push_back(std::move(scene));
  }
  if (catalog.scenes.empty()) throw EmptyDataset("no readable images in " + rgb_dir.string());
  return catalog;
}

std::vector<Rect> eval_placements(const std::vector<Scene>& scenes, double scale,
                                  std::uint64_t placement_seed) {
  Rng rng(placement_seed);
  std::vector<Rect> rects;
  rects.reserve(scenes.size());
  for (const Scene& scene : scenes) {
    const int side = side_for_scale(scene.image.size(), scale);
    const int h = std::min(side, scene.image.height());
    const int w = std::min(side, scene.image.width());
    const int row = rng.uniform_int(0, scene.image.height() - h);
    const int col = rng.uniform_int(0, scene.image.width() - w);
    rects.push_back({row, col, h, w});
  }
  return rects;
}

EvalCell evaluate_pattern(const DepthModel& model, const std::vector<Scene>& scenes,
                          const Image& natural_base, const Image& pattern, double scale,
                          std::uint64_t placement_seed, const Defense& defense,
                          EvalReference reference, double threshold) {
  if (scenes.empty()) throw EmptyDataset("no scenes to evaluate");
  if (!natural_base.same_shape(pattern)) throw DimensionMismatch("pattern and natural base differ");
  const Size input = model.input_size();
  std::vector<Scene> fitted;
  fitted.reserve(scenes.size());
  for (const Scene& s : scenes) {
    fitted.push_back({s.image.size() == input ? s.image : resize(s.image, input), std::nullopt,
                      s.identifier});
  }
  const std::vector<Rect> rects = eval_placements(fitted, scale, placement_seed);

  EvalCell cell;
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    const Image& image = fitted[k].image;
    const Rect& rect = rects[k];
    const TransformParams identity = TransformParams::identity();
    const TransformedTile attacked_tile = apply_transform(pattern, identity, {rect.height, rect.width});
    const PlacedTile placed = place_tile(input, attacked_tile.tile(), attacked_tile.footprint(),
                                         rect.row, rect.col);
    const Image attacked = apply_patch(image, placed.canvas, placed.mask);

    Image ref_image = image;
    if (reference == EvalReference::Benign) {
      const TransformedTile benign_tile =
          apply_transform(natural_base, identity, {rect.height, rect.width});
      const PlacedTile benign = place_tile(input, benign_tile.tile(), benign_tile.footprint(),
                                           rect.row, rect.col);
      ref_image = apply_patch(image, benign.canvas, benign.mask);
    }

    const std::uint64_t seed = defense_seed(placement_seed, k);
    const DepthMap d_ref = model.predict(defense.apply(ref_image, seed));
    const DepthMap d_adv = model.predict(defense.apply(attacked, seed));
    const double e = depth_error(d_ref, d_adv, placed.mask);
    const double r = affected_ratio(d_ref, d_adv, placed.mask, threshold);
    cell.per_scene.push_back({fitted[k].identifier, e, r});
    cell.E_d += e;
    cell.R_a += r;

    if (defense.kind != DefenseKind::None) {
      const DepthMap d_clean = model.predict(image);
      const DepthMap d_defended = model.predict(defense.apply(image, seed));
      cell.benign_degradation += depth_error(d_clean, d_defended, placed.mask);
    }
    cell.reference_depth.push_back(d_ref);
    cell.attacked_depth.push_back(d_adv);
  }
  const double n = static_cast<double>(fitted.size());
  cell.E_d /= n;
  cell.R_a /= n;
  cell.benign_degradation /= n;
  return cell;
}

std::vector<Scene> load_scenes(const ExperimentConfig& config, const DepthModel& model,
                               std::vector<std::string>* warnings) {
  const Size input = model.input_size();
  if (config.data_dir.empty()) return synthetic_scenes(config.synthetic_scenes, input, config.seed);
  SceneCatalog catalog = ingest(config.data_dir, config.layout, input);
  if (warnings) *warnings = catalog.warnings;
  return std::move(catalog.scenes);
}

Image load_natural_base(const ExperimentConfig& config) {
  if (config.natural_image == "synthetic") return synthetic_natural_base(config.seed);
  const Image image = read_image(config.natural_image);
  return resize(image, {kPatchSide, kPatchSide});
}

std::string loss_history_csv(const LossHistory& history) {
  std::string out = "iteration,total,depth,tv\n";
  char buf[128];
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, history.total[i],
                  history.depth[i], history.tv[i]);
    out += buf;
  }
  return out;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in(config.to_text());
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

namespace {

struct Candidate {
  std::string tag;
  Image pattern;
};

// Rows for every (scale, placement seed, defense) cell of every candidate
// pattern. The first candidate is the one being reported; its no-defense
// cells fill the headline numbers.
void sweep(const DepthModel& model, const std::vector<Scene>& scenes, const Image& natural_base,
           const std::vector<Candidate>& candidates, const ExperimentConfig& config,
           const std::string& mode, AttackReport& report, const RunFiles& files) {
  const EvalReference reference = parse_reference(config.eval_reference);
  bool first_cell = true;
  double headline_e = 0.0, headline_r = 0.0;
  int headline_n = 0;
  nlohmann::json comparators = nlohmann::json::object();
  nlohmann::json degradation = nlohmann::json::array();

  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const Candidate& cand = candidates[ci];
    const double stealth = ssim(cand.pattern, natural_base);
    double sum_e = 0.0, sum_r = 0.0;
    int n = 0;
    for (double scale : config.eval_scales) {
      for (int p = 0; p < config.eval_placements; ++p) {
        const std::uint64_t placement_seed = config.seed + static_cast<std::uint64_t>(p);
        for (const Defense& defense : config.defenses) {
          const EvalCell cell = evaluate_pattern(model, scenes, natural_base, cand.pattern, scale,
                                                 placement_seed, defense, reference,
                                                 config.affected_threshold);
          report.rows.push_back({report.run_id + ":" + cand.tag, model.name(), mode, scale,
                                 static_cast<long long>(placement_seed), defense.name(),
                                 defense.parameter, cell.E_d, cell.R_a, stealth, model.units()});
          if (defense.kind != DefenseKind::None) continue;
          sum_e += cell.E_d;
          sum_r += cell.R_a;
          ++n;
          if (ci == 0 && first_cell) {
            first_cell = false;
            report.scenes = cell.per_scene;
            for (std::size_t k = 0; k < scenes.size(); ++k) {
              write_png(files.visual(scenes[k].identifier),
                        depth_pair_figure(cell.reference_depth[k], cell.attacked_depth[k]));
            }
          }
        }
        if (ci == 0) {
          for (const Defense& defense : config.defenses) {
            if (defense.kind == DefenseKind::None) continue;
            const EvalCell cell = evaluate_pattern(model, scenes, natural_base, natural_base,
                                                   scale, placement_seed, defense, reference,
                                                   config.affected_threshold);
            degradation.push_back({{"scale", scale},
                                   {"placement_seed", placement_seed},
                                   {"defense", defense.name()},
                                   {"defense_param", defense.parameter},
                                   {"benign_E_d", cell.benign_degradation}});
          }
        }
      }
    }
    if (ci == 0) {
      report.ssim = stealth;
      headline_e = sum_e;
      headline_r = sum_r;
      headline_n = n;
    } else if (n > 0) {
      comparators[cand.tag] = {{"E_d", sum_e / n}, {"R_a", sum_r / n}, {"ssim", stealth}};
    }
  }
  if (headline_n > 0) {
    report.E_d = headline_e / headline_n;
    report.R_a = headline_r / headline_n;
  } else if (!report.rows.empty()) {
    report.E_d = report.rows.front().E_d;
    report.R_a = report.rows.front().R_a;
  }
  report.extra["comparators"] = comparators;
  report.extra["defended_clean_E_d"] = degradation;
}

void write_report(const AttackReport& report, const RunFiles& files) {
  atomic_write(files.report_csv(), to_csv(report.rows));
  atomic_write(files.report_json(), report.to_json().dump(2) + "\n");
}

AttackReport base_report(const ExperimentConfig& config, const DepthModel& model,
                         const std::string& mode, double scale) {
  AttackReport report;
  report.run_id = short_hash(config.hash());
  report.mode = mode;
  report.model = model.name();
  report.units = model.units();
  report.reference = config.eval_reference;
  report.config_hash = config.hash();
  report.seed = config.seed;
  report.config = config_to_json(config);
  report.patch_scale = scale;
  return report;
}

// Random controls evaluated next to a patch: same epsilon budget around N,
// and a full-range uniform pattern.
std::vector<Candidate> random_controls(const Image& natural_base, double epsilon,
                                       std::uint64_t seed) {
  Rng rng(seed ^ 0x72616e646f6dull);
  const Patch budget = random_budget_patch(natural_base, epsilon, rng);
  Image uniform = random_patch(natural_base.height(), natural_base.width(),
                               natural_base.channels(), rng);
  return {{"random_eps", compose_patch(budget)}, {"random_uniform", std::move(uniform)}};
}

}  // namespace

AttackRun run_attack(const ExperimentConfig& config, const OptimizeHooks& hooks) {
  config.validate();
  const auto model = make_model(config.model);
  const std::vector<Scene> scenes = load_scenes(config, *model);
  const Image natural_base = load_natural_base(config);
  RunFiles files{config.output_dir};
  fs::create_directories(files.dir);
  const nlohmann::json config_json = config_to_json(config);

  OptimizeHooks wrapped = hooks;
  if (config.checkpoint_every > 0) {
    wrapped.on_epoch = [&](int epoch, const Patch& patch) {
      if ((epoch + 1) % config.checkpoint_every == 0) {
        save_patch(patch, config_json, files.patch_png(), files.sidecar());
      }
      if (hooks.on_epoch) hooks.on_epoch(epoch, patch);
    };
  }

  AttackRun run{optimize(*model, scenes, natural_base, config.attack, wrapped), {}, files};
  save_patch(run.result.patch, config_json, files.patch_png(), files.sidecar());
  atomic_write(files.loss_csv(), loss_history_csv(run.result.history));
  atomic_write(files.config_copy(), config.to_text());

  // Evaluate what was written to disk, so a later run_eval reproduces it.
  const LoadedPatch stored = load_patch(files.patch_png(), files.sidecar());
  std::vector<Candidate> candidates{{"saam", compose_patch(stored.patch)}};
  for (Candidate& c : random_controls(stored.patch.natural_base, config.attack.epsilon, config.seed)) {
    candidates.push_back(std::move(c));
  }
  run.report = base_report(config, *model, mode_name(config.attack.mode), config.attack.patch_scale);
  sweep(*model, scenes, stored.patch.natural_base, candidates, config, run.report.mode, run.report,
        files);
  run.report.extra["epoch_seconds"] = run.result.history.epoch_seconds;
  run.report.extra["weights_hash"] = hex64(model->weights_hash());
  write_report(run.report, files);
  return run;
}

AttackReport run_eval(const fs::path& patch_png, const fs::path& sidecar,
                      const ExperimentConfig& config) {
  config.validate();
  const LoadedPatch loaded = load_patch(patch_png, sidecar);
  const auto model = make_model(config.model);
  const std::vector<Scene> scenes = load_scenes(config, *model);
  RunFiles files{config.output_dir};
  fs::create_directories(files.dir);
  std::string mode = mode_name(config.attack.mode);
  if (loaded.sidecar.contains("config") && loaded.sidecar["config"].contains("mode")) {
    mode = loaded.sidecar["config"]["mode"].get<std::string>();
  }
  AttackReport report = base_report(config, *model, mode, config.eval_scales.front());
  sweep(*model, scenes, loaded.patch.natural_base, {{"saam", compose_patch(loaded.patch)}}, config,
        mode, report, files);
  report.extra["patch"] = patch_png.string();
  write_report(report, files);
  return report;
}

BaselineKind parse_baseline(const std::string& name) {
  const std::string n = lower(name);
  if (n == "fgsm") return BaselineKind::Fgsm;
  if (n == "mifgsm" || n == "mi-fgsm" || n == "mi_fgsm") return BaselineKind::MiFgsm;
  if (n == "random") return BaselineKind::Random;
  throw ConfigError("unknown baseline '" + name + "' (fgsm|mifgsm|random)");
}

AttackReport run_baseline(BaselineKind kind, const ExperimentConfig& config,
                          const PixelAttackConfig& pixel) {
  config.validate();
  pixel.validate();
  const auto model = make_model(config.model);
  const std::vector<Scene> scenes = load_scenes(config, *model);
  RunFiles files{config.output_dir};
  fs::create_directories(files.dir);

  if (kind == BaselineKind::Random) {
    const Image natural_base = load_natural_base(config);
    Rng rng(config.seed ^ 0x72616e646f6dull);
    const Patch patch = random_budget_patch(natural_base, config.attack.epsilon, rng);
    save_patch(patch, config_to_json(config), files.patch_png(), files.sidecar());
    const LoadedPatch stored = load_patch(files.patch_png(), files.sidecar());
    std::vector<Candidate> candidates{{"random_eps", compose_patch(stored.patch)}};
    candidates.push_back({"random_uniform", random_patch(natural_base.height(), natural_base.width(),
                                                          natural_base.channels(), rng)});
    AttackReport report = base_report(config, *model, "random", config.eval_scales.front());
    sweep(*model, scenes, stored.patch.natural_base, candidates, config, "random", report, files);
    write_report(report, files);
    return report;
  }

  const std::string mode = kind == BaselineKind::Fgsm ? "fgsm" : "mifgsm";
  AttackReport report = base_report(config, *model, mode, config.eval_scales.front());
  const Size input = model->input_size();
  bool first_cell = true;
  for (double scale : config.eval_scales) {
    for (int p = 0; p < config.eval_placements; ++p) {
      const std::uint64_t placement_seed = config.seed + static_cast<std::uint64_t>(p);
      const std::vector<Rect> rects = eval_placements(scenes, scale, placement_seed);
      std::vector<Image> adversarial;
      std::vector<PatchMask> masks;
      for (std::size_t k = 0; k < scenes.size(); ++k) {
        const Image& image = scenes[k].image;
        const Rect& r = rects[k];
        PatchMask mask = make_mask(input.height, input.width, r.row, r.col, {r.height, r.width});
        const DepthMap clean = model->predict(image);
        DepthMap label = clean;
        if (scenes[k].reference_depth) label = resize_depth(*scenes[k].reference_depth, clean.size());
        const ScalarLoss objective = untargeted_objective(label, mask);
        adversarial.push_back(kind == BaselineKind::Fgsm
                                  ? fgsm(*model, image, objective, pixel.epsilon)
                                  : mi_fgsm(*model, image, objective, pixel));
        masks.push_back(std::move(mask));
        if (first_cell) write_png(files.dir / ("adv_" + scenes[k].identifier + ".png"), adversarial.back());
      }
      for (const Defense& defense : config.defenses) {
        double sum_e = 0.0, sum_r = 0.0;
        std::vector<SceneBreakdown> per_scene;
        for (std::size_t k = 0; k < scenes.size(); ++k) {
          const std::uint64_t seed = defense_seed(placement_seed, k);
          const DepthMap d_ref = model->predict(defense.apply(scenes[k].image, seed));
          const DepthMap d_adv = model->predict(defense.apply(adversarial[k], seed));
          const double e = depth_error(d_ref, d_adv, masks[k]);
          const double r = affected_ratio(d_ref, d_adv, masks[k], config.affected_threshold);
          per_scene.push_back({scenes[k].identifier, e, r});
          sum_e += e;
          sum_r += r;
          if (first_cell && defense.kind == DefenseKind::None) {
            write_png(files.visual(scenes[k].identifier), depth_pair_figure(d_ref, d_adv));
          }
        }
        const double n = static_cast<double>(scenes.size());
        double mean_ssim = 0.0;
        for (std::size_t k = 0; k < scenes.size(); ++k) mean_ssim += ssim(adversarial[k], scenes[k].image);
        report.rows.push_back({report.run_id + ":" + mode, model->name(), mode, scale,
                               static_cast<long long>(placement_seed), defense.name(),
                               defense.parameter, sum_e / n, sum_r / n, mean_ssim / n,
                               model->units()});
        if (first_cell && defense.kind == DefenseKind::None) {
          report.E_d = sum_e / n;
          report.R_a = sum_r / n;
          report.ssim = mean_ssim / n;
          report.scenes = per_scene;
        }
      }
      first_cell = false;
    }
  }
  report.extra["epsilon"] = pixel.epsilon;
  report.extra["step_alpha"] = pixel.step_alpha;
  report.extra["steps"] = pixel.steps;
  report.extra["decay_mu"] = pixel.decay_mu;
  write_report(report, files);
  return report;
}

}  // namespace depthpatch

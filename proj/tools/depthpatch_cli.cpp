// depthpatch: optimize, evaluate and stress-test adversarial patches against
// monocular depth models.
//
//   depthpatch attack --config run.cfg --epochs 50
//   depthpatch eval --patch runs/a/patch.png --output-dir runs/a-eval
//   depthpatch defend-sweep --patch runs/a/patch.png
//   depthpatch baseline fgsm --output-dir runs/fgsm

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "depthpatch/errors.hpp"
#include "depthpatch/experiment.hpp"

namespace dp = depthpatch;

namespace {

constexpr const char* kWeightsEnv = "DEPTHPATCH_WEIGHTS";
constexpr const char* kFullSweep =
    "none,jpeg:90,jpeg:70,jpeg:50,jpeg:30,median:5,median:10,median:15,median:20,"
    "gaussian:0.01,gaussian:0.02,gaussian:0.05,gaussian:0.1";

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
};

// One --flag per config key, spelled with dashes.
void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  const nlohmann::json keys = dp::config_to_json(dp::ExperimentConfig{});
  for (const auto& item : keys.items()) {
    std::string flag = item.key();
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    cmd->add_option("--" + flag, flags.values[item.key()],
                    "default: " + item.value().get<std::string>());
  }
}

dp::ExperimentConfig build_config(const ConfigFlags& flags) {
  dp::ExperimentConfig config =
      flags.config_path.empty() ? dp::ExperimentConfig{} : dp::load_config(flags.config_path);
  for (const auto& [key, value] : flags.values) {
    if (!value.empty()) dp::set_config_value(config, key, value);
  }
  return config;
}

void print_report(const dp::AttackReport& report) {
  std::printf("run %s  model %s  mode %s  reference %s\n", report.run_id.c_str(),
              report.model.c_str(), report.mode.c_str(), report.reference.c_str());
  std::printf("E_d %.6f  R_a %.4f  SSIM %.4f  (%s)\n", report.E_d, report.R_a, report.ssim,
              report.units.c_str());
  for (const auto& row : report.rows) {
    std::printf("  %-28s scale %-6g seed %-4lld %-9s %-6g E_d %.6f R_a %.4f\n",
                row.run_id.c_str(), row.scale, row.placement_seed, row.defense.c_str(),
                row.defense_param, row.E_d, row.R_a);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial patch toolkit for monocular depth estimation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(std::string("Environment: ") + kWeightsEnv +
             " points adapters at their weights root. Built-in models: toy, toy-warm.");

  ConfigFlags attack_flags, eval_flags, sweep_flags, baseline_flags;
  std::string patch_path, sidecar_path;
  std::string baseline_kind;
  dp::PixelAttackConfig pixel;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");

  CLI::App* attack = app.add_subcommand("attack", "Optimize a patch and evaluate it");
  add_config_flags(attack, attack_flags);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved patch");
  add_config_flags(eval, eval_flags);
  for (CLI::App* cmd : {eval, app.add_subcommand("defend-sweep", "Evaluate a patch under defenses")}) {
    cmd->add_option("--patch", patch_path, "Patch PNG")->required()->check(CLI::ExistingFile);
    cmd->add_option("--sidecar", sidecar_path, "Sidecar JSON (default: <patch>.json)");
  }
  CLI::App* sweep = app.get_subcommand("defend-sweep");
  add_config_flags(sweep, sweep_flags);

  CLI::App* baseline = app.add_subcommand("baseline", "Pixel-space baselines and random patches");
  baseline->add_option("kind", baseline_kind, "fgsm | mifgsm | random")->required();
  add_config_flags(baseline, baseline_flags);
  baseline->add_option("--pixel-epsilon", pixel.epsilon, "L-inf budget (default 8/255)");
  baseline->add_option("--step-alpha", pixel.step_alpha, "MI-FGSM step (default 2/255)");
  baseline->add_option("--steps", pixel.steps, "MI-FGSM iterations");
  baseline->add_option("--decay-mu", pixel.decay_mu, "MI-FGSM momentum decay");

  CLI11_PARSE(app, argc, argv);

  try {
    if (const char* root = std::getenv(kWeightsEnv); root && !quiet) {
      std::fprintf(stderr, "weights root: %s\n", root);
    }
    auto sidecar_for = [&](const std::string& png) {
      if (!sidecar_path.empty()) return std::filesystem::path(sidecar_path);
      return std::filesystem::path(png).replace_extension(".json");
    };

    if (*attack) {
      const dp::ExperimentConfig config = build_config(attack_flags);
      dp::OptimizeHooks hooks;
      if (!quiet) {
        hooks.on_epoch = [&](int epoch, const dp::Patch&) {
          if ((epoch + 1) % 10 == 0 || epoch + 1 == config.attack.epochs) {
            std::fprintf(stderr, "epoch %d/%d\n", epoch + 1, config.attack.epochs);
          }
        };
      }
      const dp::AttackRun run = dp::run_attack(config, hooks);
      if (!quiet) print_report(run.report);
    } else if (*eval) {
      const dp::ExperimentConfig config = build_config(eval_flags);
      const auto report = dp::run_eval(patch_path, sidecar_for(patch_path), config);
      if (!quiet) print_report(report);
    } else if (*sweep) {
      if (sweep_flags.values["defenses"].empty()) sweep_flags.values["defenses"] = kFullSweep;
      const dp::ExperimentConfig config = build_config(sweep_flags);
      const auto report = dp::run_eval(patch_path, sidecar_for(patch_path), config);
      if (!quiet) print_report(report);
    } else if (*baseline) {
      const dp::ExperimentConfig config = build_config(baseline_flags);
      const auto report = dp::run_baseline(dp::parse_baseline(baseline_kind), config, pixel);
      if (!quiet) print_report(report);
    }
  } catch (const dp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

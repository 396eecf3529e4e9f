// Acceptance run: one PASS/FAIL line per headline criterion, with the
// measured numbers. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "depthpatch/baselines.hpp"
#include "depthpatch/experiment.hpp"
#include "depthpatch/losses.hpp"
#include "depthpatch/metrics.hpp"
#include "depthpatch/projection.hpp"
#include "depthpatch/rng.hpp"
#include "depthpatch/synthetic.hpp"
#include "depthpatch/toy_depth_net.hpp"
#include "depthpatch/transform.hpp"

namespace dp = depthpatch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

dp::Image random_image(int h, int w, int c, dp::Rng& rng) {
  dp::Image image(h, w, c);
  for (double& v : image.values()) v = rng.uniform();
  return image;
}

// Criterion: E_d and R_a against a scalar per-pixel loop.
void metric_oracle() {
  const auto start = Clock::now();
  dp::Rng rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    dp::DepthMap a(64, 64), b(64, 64);
    dp::PatchMask mask(64, 64);
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) {
        a.at(r, c) = rng.uniform(0.0, 10.0);
        b.at(r, c) = a.at(r, c) + rng.uniform(-0.3, 0.3);
        mask.set(r, c, rng.uniform() < 0.3);
      }
    mask.set(0, 0, true);
    mask.refresh_bounding_box();
    const double threshold = 0.1;
    double sum = 0.0, count = 0.0, affected = 0.0;
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) {
        if (!mask.at(r, c)) continue;
        const double diff = std::fabs(a.at(r, c) - b.at(r, c));
        sum += diff;
        count += 1.0;
        if (diff > threshold) affected += 1.0;
      }
    worst = std::max(worst, std::fabs(dp::depth_error(a, b, mask) - sum / count));
    worst = std::max(worst, std::fabs(dp::affected_ratio(a, b, mask, threshold) - affected / count));
  }
  const double t = seconds_since(start);
  report(worst <= 1e-6 && t < 10.0, "metric_oracle",
         fmt("max |lib - brute| = %.3g over 100 pairs (<= 1e-6), %.2fs (< 10s)", worst, t));
}

// Criterion: analytic TV gradient against central differences.
void tv_gradient() {
  const auto start = Clock::now();
  dp::Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    dp::Image p = random_image(8, 8, 3, rng);
    const dp::Image g = dp::tv_loss_gradient(p, dp::kTvSmoothing);
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double saved = p.values()[i];
      const double h = 1e-6;
      p.values()[i] = saved + h;
      const double up = dp::tv_loss(p, dp::kTvSmoothing);
      p.values()[i] = saved - h;
      const double down = dp::tv_loss(p, dp::kTvSmoothing);
      p.values()[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double rel = std::fabs(g.values()[i] - fd) / std::max(std::fabs(fd), 1e-12);
      worst = std::max(worst, rel);
    }
  }
  const double t = seconds_since(start);
  report(worst < 1e-4 && t < 5.0, "tv_gradient",
         fmt("max relative error %.3g on 20 patterns (< 1e-4), %.2fs (< 5s)", worst, t));
}

// Criterion: sampler draws inside the ranges; identity apply is exact.
void transform_ranges() {
  const auto start = Clock::now();
  dp::Rng rng(3);
  const dp::TransformRanges ranges;
  int outside = 0;
  for (int i = 0; i < 10000; ++i) {
    if (!dp::sample_transform(rng, ranges).within(ranges)) ++outside;
  }
  const dp::Image pattern = random_image(64, 64, 3, rng);
  const dp::TransformedTile tile =
      dp::apply_transform(pattern, dp::TransformParams::identity(), pattern.size(), ranges);
  double deviation = 0.0;
  for (std::size_t i = 0; i < pattern.numel(); ++i) {
    deviation = std::max(deviation, std::fabs(tile.tile().values()[i] - pattern.values()[i]));
  }
  const double t = seconds_since(start);
  report(outside == 0 && deviation < 1e-6 && t < 10.0, "transform_ranges",
         fmt("%d/10000 draws outside ranges, identity deviation %.3g (< 1e-6), %.2fs (< 10s)",
             outside, deviation, t));
}

// Criterion: MI-FGSM identities on the toy model.
void baseline_identities() {
  const auto start = Clock::now();
  const dp::ToyDepthNet net;
  dp::Rng rng(4);
  dp::PatchMask mask = dp::PatchMask(128, 128).complement();
  const double eps = 8.0 / 255.0;
  double identity_gap = 0.0, worst_linf = 0.0;
  bool in_range = true;
  for (int i = 0; i < 50; ++i) {
    const dp::Image x = random_image(128, 128, 3, rng);
    dp::DepthMap reference(128, 128);
    for (double& v : reference.values()) v = rng.uniform(1.0, 15.0);
    const dp::ScalarLoss loss = dp::untargeted_objective(reference, mask);
    if (i < 5) {
      const dp::Image a = dp::mi_fgsm(net, x, loss, {eps, eps, 1, 0.0});
      const dp::Image b = dp::fgsm(net, x, loss, eps);
      for (std::size_t k = 0; k < x.numel(); ++k) {
        identity_gap = std::max(identity_gap, std::fabs(a.values()[k] - b.values()[k]));
      }
    }
    const dp::Image adv = dp::mi_fgsm(net, x, loss, dp::PixelAttackConfig{});
    for (std::size_t k = 0; k < x.numel(); ++k) {
      worst_linf = std::max(worst_linf, std::fabs(adv.values()[k] - x.values()[k]));
      in_range = in_range && adv.values()[k] >= 0.0 && adv.values()[k] <= 1.0;
    }
  }
  const double t = seconds_since(start);
  report(identity_gap == 0.0 && worst_linf <= eps && in_range && t < 30.0, "baseline_identities",
         fmt("MI-FGSM(1 step, mu 0) vs FGSM max gap %.3g (== 0); max |x'-x| %.6f (<= %.6f) over "
             "50 inputs, %.2fs (< 30s)",
             identity_gap, worst_linf, eps, t));
}

dp::ExperimentConfig toy_config(const fs::path& out) {
  dp::ExperimentConfig config;
  config.model = "toy";
  config.synthetic_scenes = 8;
  config.attack.epochs = 200;  // 8 scenes in one batch: 200 iterations
  config.attack.batch = 8;
  config.attack.mode = dp::AttackMode::Untargeted;
  config.output_dir = out;
  return config;
}

struct Invariants {
  double worst_linf = 0.0;
  bool in_range = true;
  std::size_t steps = 0;
  double seconds = 0.0;
};

dp::AttackRun attack(const dp::ExperimentConfig& config, Invariants& inv, double& seconds) {
  dp::OptimizeHooks hooks;
  hooks.on_step = [&](const dp::StepInfo& info) {
    const auto start = Clock::now();
    const dp::Patch& p = *info.patch;
    inv.worst_linf = std::max(inv.worst_linf, dp::linf_norm(p.perturbation));
    const auto n = p.natural_base.values();
    const auto d = p.perturbation.values();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double v = n[i] + d[i];
      if (v < 0.0 || v > 1.0) inv.in_range = false;
    }
    ++inv.steps;
    inv.seconds += seconds_since(start);
  };
  const auto start = Clock::now();
  dp::AttackRun run = dp::run_attack(config, hooks);
  seconds = seconds_since(start);
  return run;
}

double no_defense_e(const dp::AttackReport& report) {
  for (const auto& row : report.rows) {
    if (row.defense == "none") return row.E_d;
  }
  return std::nan("");
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "depthpatch_acceptance";
  fs::remove_all(work);

  metric_oracle();
  tv_gradient();
  transform_ranges();
  baseline_identities();

  // One full toy attack shared by the projection, effectiveness and
  // stealth criteria.
  Invariants inv;
  double attack_seconds = 0.0;
  const dp::ExperimentConfig config = toy_config(work / "attack");
  const dp::AttackRun run = attack(config, inv, attack_seconds);
  const double eps = config.attack.epsilon;

  report(inv.steps == 200 && inv.worst_linf <= eps + 1e-7 && inv.in_range &&
             inv.seconds < 0.05 * attack_seconds,
         "projection_invariant",
         fmt("%zu steps, max |delta| %.9f (<= eps + 1e-7), composed in [0,1]: %s, check cost "
             "%.2f%% of runtime (< 5%%)",
             inv.steps, inv.worst_linf, inv.in_range ? "yes" : "no",
             100.0 * inv.seconds / attack_seconds));

  const auto& comparators = run.report.extra.at("comparators");
  const double saam_e = run.report.E_d, saam_r = run.report.R_a;
  const double rand_e = comparators.at("random_eps").at("E_d").get<double>();
  const double rand_r = comparators.at("random_eps").at("R_a").get<double>();
  const double uniform_e = comparators.at("random_uniform").at("E_d").get<double>();
  const auto& depth = run.result.history.depth;
  const bool loss_improved = depth.back() < depth.front();
  report(saam_e >= 10.0 * rand_e && saam_r > rand_r && loss_improved && attack_seconds < 300.0,
         "attack_effectiveness",
         fmt("E_d saam %.5f vs random-eps %.5f (ratio %.1f, >= 10); R_a %.4f vs %.4f; depth loss "
             "%.5f -> %.5f; attack %.1fs (< 300s) [U[0,1] pattern E_d %.5f]",
             saam_e, rand_e, saam_e / std::max(rand_e, 1e-300), saam_r, rand_r, depth.front(),
             depth.back(), attack_seconds, uniform_e));

  report(run.report.ssim >= 0.85, "stealthiness",
         fmt("SSIM(patch, natural base) %.4f (>= 0.85) at eps %.2f", run.report.ssim, eps));

  // Defense trends on the saved patch.
  {
    const auto start = Clock::now();
    dp::ExperimentConfig sweep = config;
    sweep.output_dir = work / "defenses";
    sweep.defenses.clear();
    for (const char* d : {"none", "jpeg:90", "jpeg:70", "jpeg:50", "jpeg:30", "gaussian:0.01",
                          "gaussian:0.02", "gaussian:0.05", "gaussian:0.1"}) {
      sweep.defenses.push_back(dp::Defense::parse(d));
    }
    const dp::AttackReport r = dp::run_eval(run.files.patch_png(), run.files.sidecar(), sweep);
    std::vector<double> jpeg, gauss;
    for (const auto& row : r.rows) {
      if (row.defense == "jpeg") jpeg.push_back(row.E_d);
      if (row.defense == "gaussian") gauss.push_back(row.E_d);
    }
    bool jpeg_ok = jpeg.size() == 4, gauss_ok = gauss.size() == 4;
    for (std::size_t i = 1; i < jpeg.size(); ++i) jpeg_ok = jpeg_ok && jpeg[i] <= jpeg[i - 1];
    for (std::size_t i = 1; i < gauss.size(); ++i) gauss_ok = gauss_ok && gauss[i] <= 1.05 * gauss[i - 1];
    const double t = seconds_since(start);
    const double none = no_defense_e(r);
    report(jpeg_ok && gauss_ok && t < 120.0, "defense_trend",
           fmt("none %.5f; jpeg q90/70/50/30 %.5f %.5f %.5f %.5f (non-increasing: %s); gaussian "
               "0.01/0.02/0.05/0.1 %.5f %.5f %.5f %.5f (non-increasing within 5%%: %s); %.1fs "
               "(< 120s)",
               none, jpeg[0], jpeg[1], jpeg[2], jpeg[3], jpeg_ok ? "yes" : "no", gauss[0], gauss[1],
               gauss[2], gauss[3], gauss_ok ? "yes" : "no", t));
  }

  // A second run with the same seed.
  {
    Invariants again_inv;
    double again_seconds = 0.0;
    const dp::AttackRun again = attack(toy_config(work / "attack_again"), again_inv, again_seconds);
    const auto& a = run.result.history.total;
    const auto& b = again.result.history.total;
    double worst = a.size() == b.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      worst = std::max(worst, std::fabs(a[i] - b[i]));
    }
    const bool rows_equal = run.report.rows == again.report.rows;
    report(worst <= 1e-5 && rows_equal, "determinism",
           fmt("max loss-history difference %.3g over %zu entries (<= 1e-5); report rows "
               "identical: %s",
               worst, a.size(), rows_equal ? "yes" : "no"));
  }

  // FGSM at 8/255 over the same scenes and placements, measured in the
  // patch region.
  {
    dp::ExperimentConfig fgsm_config = config;
    fgsm_config.output_dir = work / "fgsm";
    const dp::AttackReport fgsm = dp::run_baseline(dp::BaselineKind::Fgsm, fgsm_config);
    report(saam_e > fgsm.E_d, "patch_vs_fgsm",
           fmt("E_d saam %.5f vs FGSM(8/255) %.5f in the patch region", saam_e, fgsm.E_d));
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

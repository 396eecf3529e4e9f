#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "depthpatch/depth_model.hpp"
#include "depthpatch/losses.hpp"
#include "depthpatch/patch.hpp"
#include "depthpatch/transform.hpp"

namespace depthpatch {

enum class TvReduction { Mean, Sum };

/// Attack hyper-parameters. Defaults are the published values.
struct AttackConfig {
  int epochs = 200;
  int batch = 8;
  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double epsilon = 0.03;
  double alpha = 1.0;
  double beta = 0.5;
  AttackMode mode = AttackMode::Untargeted;
  double target_depth_c = 20.0;
  double patch_scale = 0.05;  // fraction of image area
  std::uint64_t rng_seed = 0;
  TvReduction tv_reduction = TvReduction::Mean;
  TransformRanges transforms{};

  LossWeights weights() const;
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct LossHistory {
  std::vector<double> total;
  std::vector<double> depth;
  std::vector<double> tv;
  std::vector<double> epoch_seconds;

  std::size_t size() const noexcept { return total.size(); }
};

struct AttackResult {
  Patch patch;
  LossHistory history;
};

/// Called after every optimizer step (after projection and clamping).
struct StepInfo {
  std::size_t iteration = 0;
  int epoch = 0;
  const Patch* patch = nullptr;
  double total = 0.0;
  double depth = 0.0;
  double tv = 0.0;
};
using StepObserver = std::function<void(const StepInfo&)>;
/// Called at the end of each epoch with the current patch.
using EpochObserver = std::function<void(int epoch, const Patch&)>;

struct OptimizeHooks {
  StepObserver on_step;
  EpochObserver on_epoch;
};

/// Expectation-over-transformation patch optimization.
///
/// Each step takes a batch of scenes; for every scene it draws fresh
/// transform parameters and a fresh placement, renders the patch, runs the
/// model, and accumulates the gradient of
///   alpha * L_depth + beta * L_tv
/// with respect to delta. Adam then takes a descent step on delta, after
/// which delta is projected onto the epsilon ball and N + delta is clamped
/// to [0,1]. Clean depth for each scene is predicted once, up front, from
/// the unpatched image. delta starts uniform in [-epsilon, epsilon].
///
/// Throws NonFiniteLoss with the offending iteration; adapter errors
/// propagate unchanged.
AttackResult optimize(const DepthModel& model, const std::vector<Scene>& scenes,
                      const Image& natural_base, const AttackConfig& config,
                      const OptimizeHooks& hooks = {});

/// Initial patch the optimizer starts from (exposed for tests).
Patch initial_patch(const Image& natural_base, double epsilon, std::uint64_t seed);

}  // namespace depthpatch

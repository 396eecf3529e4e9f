#include "depthpatch/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "depthpatch/errors.hpp"
#include "depthpatch/projection.hpp"

namespace depthpatch {

LossWeights AttackConfig::weights() const {
  LossWeights w{alpha, beta, std::nullopt};
  if (mode == AttackMode::Targeted) w.target_depth_c = target_depth_c;
  return w;
}

void AttackConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(epochs > 0, "epochs must be positive");
  require(batch > 0, "batch must be positive");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must be in [0,1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must be in [0,1)");
  require(adam_epsilon > 0.0, "adam_epsilon must be positive");
  require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must be in (0,1]");
  require(alpha >= 0.0 && std::isfinite(alpha), "alpha must be >= 0");
  require(beta >= 0.0 && std::isfinite(beta), "beta must be >= 0");
  require(std::isfinite(target_depth_c), "target_depth_c must be finite");
  require(patch_scale > 0.0 && patch_scale <= 1.0, "patch_scale must be in (0,1]");
  const TransformRanges& t = transforms;
  require(t.noise >= 0 && t.rotation_deg >= 0 && t.brightness >= 0 && t.affine >= 0,
          "transform amplitudes must be >= 0");
  require(t.contrast_min > 0 && t.contrast_min <= t.contrast_max, "bad contrast range");
  require(t.crop_min < t.crop_max && t.crop_min > -1.0, "bad crop range");
  require(t.scale_min > 0 && t.scale_min <= t.scale_max, "bad scale range");
}

Patch initial_patch(const Image& natural_base, double epsilon, std::uint64_t seed) {
  Patch patch = Patch::around(natural_base, epsilon);
  Rng rng(seed);
  for (double& v : patch.perturbation.values()) v = rng.uniform(-epsilon, epsilon);
  constrain_patch_inplace(patch);
  return patch;
}

namespace {

struct Adam {
  std::vector<double> m, v;
  double b1, b2, eps, lr;
  long t = 0;

  Adam(std::size_t n, const AttackConfig& c)
      : m(n), v(n), b1(c.adam_beta1), b2(c.adam_beta2), eps(c.adam_epsilon), lr(c.learning_rate) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

Image fit_to_model(const Image& image, Size size) {
  return image.size() == size ? image : resize(image, size);
}

}  // namespace

AttackResult optimize(const DepthModel& model, const std::vector<Scene>& scenes,
                      const Image& natural_base, const AttackConfig& config,
                      const OptimizeHooks& hooks) {
  config.validate();
  if (scenes.empty()) throw EmptyDataset("optimize needs at least one scene");
  if (!model.supports_input_gradients()) {
    throw GradientUnavailable("model '" + model.name() + "' does not expose input gradients");
  }
  if (natural_base.channels() != 3 || !natural_base.within_unit_range()) {
    throw InvalidArgument("natural base must be 3-channel in [0,1]");
  }

  const Size input = model.input_size();
  std::vector<Image> images;
  std::vector<DepthMap> clean;
  images.reserve(scenes.size());
  clean.reserve(scenes.size());
  for (const Scene& scene : scenes) {
    scene.validate();
    images.push_back(fit_to_model(scene.image, input));
    clean.push_back(model.predict(images.back()));
  }

  Rng rng(config.rng_seed);
  AttackResult result{initial_patch(natural_base, config.epsilon, rng.fork_seed()), {}};
  Patch& patch = result.patch;
  const LossWeights weights = config.weights();
  const int side = side_for_scale(input, config.patch_scale);
  const Size target{side, side};
  const std::size_t n = patch.perturbation.numel();
  const double tv_scale = config.tv_reduction == TvReduction::Mean
                              ? 1.0 / static_cast<double>(std::max<std::size_t>(
                                          1, tv_term_count(natural_base)))
                              : 1.0;
  Adam adam(n, config);
  std::vector<double> grad(n);

  const std::size_t batches =
      (scenes.size() + static_cast<std::size_t>(config.batch) - 1) / config.batch;
  std::size_t iteration = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    for (std::size_t b = 0; b < batches; ++b, ++iteration) {
      const std::size_t first = b * config.batch;
      const std::size_t last = std::min(scenes.size(), first + config.batch);
      const double inv_batch = 1.0 / static_cast<double>(last - first);

      const Image pattern = compose_patch(patch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double depth_loss = 0.0;

      for (std::size_t k = first; k < last; ++k) {
        const TransformParams params = sample_transform(rng, config.transforms);
        const TransformedTile rendered = apply_transform(pattern, params, target, config.transforms);
        const Size tile = rendered.size();
        const int row = rng.uniform_int(std::min(0, input.height - tile.height),
                                        std::max(0, input.height - tile.height));
        const int col = rng.uniform_int(std::min(0, input.width - tile.width),
                                        std::max(0, input.width - tile.width));
        const PlacedTile placed = place_tile(input, rendered.tile(), rendered.footprint(), row, col);
        if (placed.mask.count() == 0) continue;
        const Image adversarial = apply_patch(images[k], placed.canvas, placed.mask);

        const DepthMap& reference = clean[k];
        const PatchMask& mask = placed.mask;
        ScalarLoss loss = [&](const DepthMap& d) {
          if (weights.target_depth_c) {
            return LossValue{targeted_depth_loss(d, *weights.target_depth_c, mask),
                             targeted_depth_loss_gradient(d, *weights.target_depth_c, mask)};
          }
          return LossValue{untargeted_depth_loss(reference, d, mask),
                           untargeted_depth_loss_gradient(reference, d, mask)};
        };
        double value = 0.0;
        const Image grad_image = model.input_gradient(adversarial, loss, nullptr, &value);
        depth_loss += value * inv_batch;

        const Image grad_tile = canvas_gradient_to_tile(grad_image, placed, tile);
        const Image grad_pattern = rendered.backward(grad_tile);
        const auto gp = grad_pattern.values();
        const double scale = weights.alpha * inv_batch;
        for (std::size_t i = 0; i < n; ++i) grad[i] += scale * gp[i];
      }

      const double tv = tv_loss(pattern, kTvSmoothing) * tv_scale;
      const Image grad_tv = tv_loss_gradient(pattern, kTvSmoothing);
      const auto gtv = grad_tv.values();
      const auto base = patch.natural_base.values();
      auto delta = patch.perturbation.values();
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] += weights.beta * tv_scale * gtv[i];
        // Gradient flows through the clamp only where N + delta is inside [0,1].
        const double composed = base[i] + delta[i];
        if (composed < 0.0 || composed > 1.0) grad[i] = 0.0;
      }

      const double total = total_loss(depth_loss, tv, weights);
      if (!std::isfinite(total)) {
        throw NonFiniteLoss(iteration, "loss became non-finite at iteration " +
                                           std::to_string(iteration));
      }

      adam.step(delta, grad);
      constrain_patch_inplace(patch);

      result.history.total.push_back(total);
      result.history.depth.push_back(depth_loss);
      result.history.tv.push_back(tv);
      if (hooks.on_step) hooks.on_step({iteration, epoch, &patch, total, depth_loss, tv});
    }
    result.history.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    if (hooks.on_epoch) hooks.on_epoch(epoch, patch);
  }
  return result;
}

}  // namespace depthpatch

#include "depthpatch/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "depthpatch/errors.hpp"
#include "depthpatch/losses.hpp"

namespace depthpatch {

void PixelAttackConfig::validate() const {
  if (!(step_alpha > 0.0)) throw ConfigError("step_alpha must be positive");
  if (!(epsilon >= step_alpha)) throw ConfigError("epsilon must be >= step_alpha");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(decay_mu >= 0.0)) throw ConfigError("decay_mu must be >= 0");
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Image fgsm(const DepthModel& model, const Image& image, const ScalarLoss& loss, double epsilon) {
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
  const Image grad = model.input_gradient(image, loss);
  Image out = image;
  auto x = out.values();
  const auto g = grad.values();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i] - epsilon * sign(g[i]), 0.0, 1.0);
  return out;
}

Image mi_fgsm(const DepthModel& model, const Image& image, const ScalarLoss& loss,
              const PixelAttackConfig& config) {
  config.validate();
  const auto x0 = image.values();
  Image adv = image;
  std::vector<double> momentum(image.numel(), 0.0);
  for (int t = 0; t < config.steps; ++t) {
    const Image grad = model.input_gradient(adv, loss);
    const auto g = grad.values();
    double l1 = 0.0;
    for (double v : g) l1 += std::abs(v);
    const double inv = l1 > 0.0 ? 1.0 / l1 : 1.0;
    auto x = adv.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
      momentum[i] = config.decay_mu * momentum[i] + g[i] * inv;
      const double stepped = x[i] - config.step_alpha * sign(momentum[i]);
      const double projected =
          std::min(std::max(stepped, x0[i] - config.epsilon), x0[i] + config.epsilon);
      x[i] = std::clamp(projected, 0.0, 1.0);
    }
  }
  return adv;
}

Image random_patch(int height, int width, int channels, Rng& rng) {
  if (height < 1 || width < 1 || channels < 1) throw InvalidArgument("random_patch needs a positive shape");
  Image out(height, width, channels);
  for (double& v : out.values()) v = rng.uniform();
  return out;
}

Patch random_budget_patch(const Image& natural_base, double epsilon, Rng& rng) {
  Patch patch = Patch::around(natural_base, epsilon);
  const auto base = natural_base.values();
  auto delta = patch.perturbation.values();
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double d = rng.uniform(-epsilon, epsilon);
    delta[i] = std::clamp(base[i] + d, 0.0, 1.0) - base[i];
  }
  return patch;
}

ScalarLoss untargeted_objective(DepthMap reference, PatchMask mask) {
  return [reference = std::move(reference), mask = std::move(mask)](const DepthMap& d) {
    return LossValue{untargeted_depth_loss(reference, d, mask),
                     untargeted_depth_loss_gradient(reference, d, mask)};
  };
}

}  // namespace depthpatch

#pragma once

#include <cstdint>

#include "depthpatch/depth_model.hpp"
#include "depthpatch/patch.hpp"
#include "depthpatch/rng.hpp"

namespace depthpatch {

struct PixelAttackConfig {
  double epsilon = 8.0 / 255.0;
  double step_alpha = 2.0 / 255.0;
  int steps = 10;
  double decay_mu = 1.0;

  void validate() const;
};

/// x - epsilon * sign(grad J), clamped to [0,1]; sign(0) = 0.
Image fgsm(const DepthModel& model, const Image& image, const ScalarLoss& loss, double epsilon);

/// Momentum iterative FGSM. g starts at zero; each iterate is projected to
/// the epsilon ball around the input and clamped. A zero gradient skips the
/// L1 normalisation.
Image mi_fgsm(const DepthModel& model, const Image& image, const ScalarLoss& loss,
              const PixelAttackConfig& config);

/// Pattern with every value uniform in [0,1].
Image random_patch(int height, int width, int channels, Rng& rng);

/// Natural base plus a uniform random perturbation in [-epsilon, epsilon]
/// (clamped): the random control with the same budget as an optimized patch.
Patch random_budget_patch(const Image& natural_base, double epsilon, Rng& rng);

/// Untargeted depth objective for the pixel attacks:
///   J(x) = -mean_{mask} |reference - F(x)|.
/// Descending J pushes the masked prediction away from `reference`.
ScalarLoss untargeted_objective(DepthMap reference, PatchMask mask);

}  // namespace depthpatch

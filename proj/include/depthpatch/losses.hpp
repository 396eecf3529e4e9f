#pragma once

#include <optional>

#include "depthpatch/image.hpp"
#include "depthpatch/patch.hpp"

namespace depthpatch {

enum class AttackMode { Untargeted, Targeted };

struct LossWeights {
  double alpha = 1.0;
  double beta = 0.5;
  std::optional<double> target_depth_c;  // set in targeted mode only

  AttackMode mode() const noexcept {
    return target_depth_c ? AttackMode::Targeted : AttackMode::Untargeted;
  }
};

/// Smoothing added inside the TV square root when differentiating.
inline constexpr double kTvSmoothing = 1e-8;

/// Isotropic total variation summed over channels and over the valid
/// interior indices i in [0, H-2], j in [0, W-2]; no padding.
/// With smoothing = 0 the exact value is returned.
double tv_loss(const Image& pattern, double smoothing = 0.0);

/// Number of square-root terms tv_loss sums (per channel, all channels).
std::size_t tv_term_count(const Image& pattern);

/// Analytic gradient of tv_loss(pattern, smoothing).
Image tv_loss_gradient(const Image& pattern, double smoothing = kTvSmoothing);

/// -mean_{M=1} |d_clean - d_adv|. EmptyMask / DimensionMismatch.
double untargeted_depth_loss(const DepthMap& d_clean, const DepthMap& d_adv, const PatchMask& mask);
/// Gradient w.r.t. d_adv (sign(0) = 0).
DepthMap untargeted_depth_loss_gradient(const DepthMap& d_clean, const DepthMap& d_adv,
                                        const PatchMask& mask);

/// mean_{M=1} |d_adv - c|.
double targeted_depth_loss(const DepthMap& d_adv, double c, const PatchMask& mask);
DepthMap targeted_depth_loss_gradient(const DepthMap& d_adv, double c, const PatchMask& mask);

inline double total_loss(double depth_loss, double tv, const LossWeights& weights) {
  return weights.alpha * depth_loss + weights.beta * tv;
}

}  // namespace depthpatch

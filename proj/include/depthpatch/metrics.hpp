#pragma once

#include "depthpatch/image.hpp"
#include "depthpatch/patch.hpp"

namespace depthpatch {

inline constexpr double kAffectedThreshold = 0.1;

/// Masked mean absolute difference. EmptyMask / DimensionMismatch.
double depth_error(const DepthMap& d_clean, const DepthMap& d_adv, const PatchMask& mask);

/// Fraction of masked pixels with |d_clean - d_adv| > threshold (strict).
double affected_ratio(const DepthMap& d_clean, const DepthMap& d_adv, const PatchMask& mask,
                      double threshold = kAffectedThreshold);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Single-scale SSIM with a normalised Gaussian window, evaluated over the
/// windows that fit entirely inside the image, averaged over channels.
/// Images smaller than the window use one window clipped to the image.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

}  // namespace depthpatch

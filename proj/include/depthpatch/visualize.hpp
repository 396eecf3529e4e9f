#pragma once

#include <array>

#include "depthpatch/image.hpp"

namespace depthpatch {

/// Viridis colour for t in [0,1] (polynomial fit).
std::array<double, 3> viridis(double t);

/// Render a depth map with a fixed [lo, hi] range.
Image colorize_depth(const DepthMap& depth, double lo, double hi);

/// Clean | adversarial side by side with a shared colour scale, separated
/// by a 4-pixel white gutter.
Image depth_pair_figure(const DepthMap& clean, const DepthMap& adversarial);

}  // namespace depthpatch

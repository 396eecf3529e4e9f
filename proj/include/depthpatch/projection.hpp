#pragma once

#include "depthpatch/image.hpp"
#include "depthpatch/patch.hpp"

namespace depthpatch {

/// Elementwise clip of delta to [-epsilon, epsilon].
Image project(const Image& delta, double epsilon);

/// Project the perturbation onto the epsilon ball, then clamp N + delta to
/// [0,1] and fold the clamp back into delta so compose_patch reproduces it.
Patch constrain_patch(const Patch& patch);

/// In-place variant used inside the optimizer loop.
void constrain_patch_inplace(Patch& patch);

/// max |delta|.
double linf_norm(const Image& delta);

}  // namespace depthpatch

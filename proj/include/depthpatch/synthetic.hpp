#pragma once

#include <cstdint>
#include <vector>

#include "depthpatch/image.hpp"
#include "depthpatch/patch.hpp"

namespace depthpatch {

/// Indoor-looking procedural scenes: a floor/wall layout with a few boxes,
/// each carrying a ground-truth depth map (near floor ~2, far wall ~10).
std::vector<Scene> synthetic_scenes(int count, Size size, std::uint64_t seed);

/// Textured "natural" image used as the base N of a stealthy patch.
Image synthetic_natural_base(std::uint64_t seed, int side = kPatchSide);

}  // namespace depthpatch

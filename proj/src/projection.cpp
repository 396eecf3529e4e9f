#include "depthpatch/projection.hpp"

#include <algorithm>
#include <cmath>

#include "depthpatch/errors.hpp"

namespace depthpatch {

Image project(const Image& delta, double epsilon) {
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
  Image out = delta;
  for (double& v : out.values()) v = std::clamp(v, -epsilon, epsilon);
  return out;
}

void constrain_patch_inplace(Patch& patch) {
  if (patch.epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
  if (!patch.natural_base.same_shape(patch.perturbation)) {
    throw DimensionMismatch("natural base and perturbation differ in shape");
  }
  const auto base = patch.natural_base.values();
  auto delta = patch.perturbation.values();
  const double eps = patch.epsilon;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    double d = std::clamp(delta[i], -eps, eps);
    // Fold the [0,1] clamp into delta so N + delta is the composed value.
    // Only clamped entries change; the nudge absorbs rounding in 1 - N.
    const double composed = base[i] + d;
    if (composed < 0.0) {
      d = -base[i];
    } else if (composed > 1.0) {
      d = 1.0 - base[i];
      while (base[i] + d > 1.0) d = std::nextafter(d, -1.0);
    }
    delta[i] = d;
  }
}

Patch constrain_patch(const Patch& patch) {
  Patch out = patch;
  constrain_patch_inplace(out);
  return out;
}

double linf_norm(const Image& delta) {
  double m = 0.0;
  for (double v : delta.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace depthpatch

#include "depthpatch/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "depthpatch/errors.hpp"

namespace depthpatch {

std::array<double, 3> viridis(double t) {
  // Sixth-order polynomial fit of the viridis table, per channel.
  static constexpr double c[7][3] = {
      {0.2777273272234177, 0.005407344544966578, 0.3340998053353061},
      {0.1050930431085774, 1.404613529898575, 1.384590162594685},
      {-0.3308618287255563, 0.214847559468213, 0.09509516302823659},
      {-4.634230498983486, -5.799100973351585, -19.33244095627987},
      {6.228269936347081, 14.17993336680509, 56.69055260068105},
      {4.776384997670288, -13.74514537774601, -65.35303263337234},
      {-5.435455855934631, 4.645852612178535, 26.3124352495832},
  };
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  std::array<double, 3> rgb{};
  for (int ch = 0; ch < 3; ++ch) {
    double v = c[6][ch];
    for (int k = 5; k >= 0; --k) v = c[k][ch] + t * v;
    rgb[ch] = std::clamp(v, 0.0, 1.0);
  }
  return rgb;
}

Image colorize_depth(const DepthMap& depth, double lo, double hi) {
  Image out(depth.height(), depth.width(), 3);
  const double span = hi > lo ? hi - lo : 1.0;
  for (int r = 0; r < depth.height(); ++r) {
    for (int c = 0; c < depth.width(); ++c) {
      const auto rgb = viridis((depth.at(r, c) - lo) / span);
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = rgb[ch];
    }
  }
  return out;
}

Image depth_pair_figure(const DepthMap& clean, const DepthMap& adversarial) {
  if (clean.height() != adversarial.height() || clean.width() != adversarial.width()) {
    throw DimensionMismatch("depth pair must share a shape");
  }
  constexpr int kGutter = 4;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const DepthMap* d : {&clean, &adversarial}) {
    for (double v : d->values()) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) lo = hi = 0.0;
  const Image left = colorize_depth(clean, lo, hi);
  const Image right = colorize_depth(adversarial, lo, hi);
  const int h = clean.height(), w = clean.width();
  Image out(h, 2 * w + kGutter, 3);
  for (double& v : out.values()) v = 1.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        out.at(r, c, ch) = left.at(r, c, ch);
        out.at(r, c + w + kGutter, ch) = right.at(r, c, ch);
      }
    }
  }
  return out;
}

}  // namespace depthpatch

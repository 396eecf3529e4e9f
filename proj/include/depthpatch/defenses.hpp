#pragma once

#include <cstdint>
#include <string>

#include "depthpatch/image.hpp"

namespace depthpatch {

/// Baseline JPEG encode at `quality` (1..100) and decode, via libjpeg.
/// Values are quantised to 8 bits on the way in. CodecError on failure.
Image jpeg_compress(const Image& image, int quality);

/// Odd kernel actually used for a requested median size.
int effective_median_kernel(int kernel);

/// Per-channel median filter; even kernels are rounded up to the next odd
/// size, edges are mirrored (reflect-101).
Image median_blur(const Image& image, int kernel);

/// Add i.i.d. N(0, sigma^2) noise and clamp to [0,1].
Image gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

enum class DefenseKind { None, Jpeg, Median, Gaussian };

struct Defense {
  DefenseKind kind = DefenseKind::None;
  double parameter = 0.0;

  std::string name() const;
  /// "none", "jpeg:90", "median:5", "gaussian:0.05".
  static Defense parse(const std::string& text);
  Image apply(const Image& image, std::uint64_t seed) const;
};

}  // namespace depthpatch

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "depthpatch/image.hpp"
#include "depthpatch/rng.hpp"

namespace depthpatch {

/// Sampling ranges for the expectation-over-transformation distribution.
/// Defaults are the published table values.
struct TransformRanges {
  double noise = 0.1;            // per-pixel additive, uniform in [-noise, noise]
  double rotation_deg = 20.0;    // uniform in [-rotation_deg, rotation_deg]
  double brightness = 0.1;       // uniform in [-brightness, brightness]
  double contrast_min = 0.8;
  double contrast_max = 1.2;
  double crop_min = -0.7;        // crop control, mapped to retained fraction
  double crop_max = 1.0;
  double affine = 0.7;           // perspective strength
  double scale_min = 0.25;
  double scale_max = 1.25;
};

enum class CropEdge : std::uint8_t { Top = 0, Bottom = 1, Left = 2, Right = 3 };

struct TransformParams {
  double noise_amplitude = 0.0;
  double rotation_deg = 0.0;
  double brightness = 0.0;
  double contrast = 1.0;
  /// Crop control in [crop_min, crop_max]; crop_max means nothing removed.
  double crop_fraction = 1.0;
  CropEdge crop_edge = CropEdge::Top;
  double affine_strength = 0.0;
  /// Inward corner displacement draws in [0,1] for TL, TR, BR, BL (x, y).
  std::array<double, 8> corner_draws{};
  double scale = 1.0;
  /// Seeds the per-pixel noise field.
  std::uint64_t rng_seed = 0;

  static TransformParams identity() { return {}; }

  /// Fraction of the tile left visible by the crop band.
  double retained_fraction(const TransformRanges& ranges = {}) const;

  bool within(const TransformRanges& ranges) const;
};

/// One draw from the distribution. Deterministic in the state of `rng`.
TransformParams sample_transform(Rng& rng, const TransformRanges& ranges = {});

/// Output of `apply_transform`; keeps what the backward pass needs.
class TransformedTile {
 public:
  const Image& tile() const noexcept { return tile_; }
  /// Pixels still covered by patch content after rotation, warp and crop.
  const std::vector<std::uint8_t>& footprint() const noexcept { return footprint_; }
  Size size() const noexcept { return tile_.size(); }
  int mip_level() const noexcept { return level_; }

  /// Vector-Jacobian product: gradient w.r.t. the source pattern given the
  /// gradient w.r.t. the tile.
  Image backward(const Image& grad_tile) const;

 private:
  friend TransformedTile apply_transform(const Image&, const TransformParams&, Size,
                                         const TransformRanges&);
  struct Tap {
    std::array<std::uint32_t, 4> index{};  // pixel offsets into the mip level (x channels)
    std::array<double, 4> weight{};
  };

  Image tile_;
  std::vector<std::uint8_t> footprint_;
  std::vector<Tap> taps_;                 // one per tile pixel
  std::vector<std::uint8_t> photometric_pass_;  // per tile value, 1 if not clamped
  std::vector<Size> level_sizes_;         // mip pyramid sizes, [0] = pattern
  int level_ = 0;
  int channels_ = 0;
  double contrast_ = 1.0;
};

/// Render the pattern as a tile of round(target * scale) pixels.
/// Geometric ops (warp, rotation, crop) come first, then
/// out = clamp(contrast * x + brightness + noise, 0, 1).
/// Throws DegenerateGeometry when the tile or the retained crop is < 1 px.
TransformedTile apply_transform(const Image& pattern, const TransformParams& params, Size target,
                                const TransformRanges& ranges = {});

/// 2x2 box mip pyramid, level 0 = input. Exposed for tests.
std::vector<Image> build_mip_pyramid(const Image& pattern, int levels);

}  // namespace depthpatch

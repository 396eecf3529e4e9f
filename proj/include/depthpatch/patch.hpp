#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "depthpatch/image.hpp"

namespace depthpatch {

/// Side length of the printable pattern in pixels.
inline constexpr int kPatchSide = 256;

struct Scene {
  Image image;                           // H x W x 3 in [0,1]
  std::optional<DepthMap> reference_depth;
  std::string identifier;

  /// Throws DimensionMismatch / InvalidArgument if the invariants are broken.
  void validate() const;
};

/// Natural image N plus perturbation delta, constrained to |delta| <= epsilon.
struct Patch {
  Image natural_base;
  Image perturbation;
  double epsilon = 0.03;

  /// Zero perturbation around `natural`.
  static Patch around(Image natural, double epsilon);
};

/// Binary placement matrix M_P with the rectangle that encloses its support.
class PatchMask {
 public:
  PatchMask() = default;
  PatchMask(int height, int width);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  Size size() const noexcept { return {height_, width_}; }

  std::uint8_t at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  void set(int row, int col, bool on);

  const std::vector<std::uint8_t>& values() const noexcept { return values_; }
  const Rect& bounding_box() const noexcept { return bbox_; }

  std::size_t count() const noexcept;
  /// count / (H * W)
  double area_ratio() const noexcept;

  /// Recompute the bounding box from the support.
  void refresh_bounding_box();

  /// 1 - M.
  PatchMask complement() const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> values_;
  Rect bbox_{};
};

/// clamp(N + delta, 0, 1). Inputs are not modified.
Image compose_patch(const Patch& patch);

/// I* = (1 - M) * I + M * T, with T an H x W x 3 canvas aligned with M.
Image apply_patch(const Image& scene, const Image& tile_canvas, const PatchMask& mask);

/// Backward of apply_patch with respect to the canvas: grad * M.
Image apply_patch_canvas_gradient(const Image& grad_output, const PatchMask& mask);

/// Rectangular mask of `patch_pixels` at `placement`; OutOfBounds when the
/// rectangle is empty or leaves the image.
PatchMask make_mask(int image_height, int image_width, int row, int col, Size patch_pixels);

/// Square side whose area is `scale` of an H x W image (at least one pixel).
int side_for_scale(Size image, double scale);

/// A transformed tile positioned inside a full-size canvas.
struct PlacedTile {
  Image canvas;      // H x W x 3, zero outside the tile
  PatchMask mask;    // footprint after clipping to the image
  Rect tile_rect;    // unclipped tile rectangle in image coordinates
};

/// Place `tile` (with its own footprint) at (row, col); parts outside the
/// image are dropped.
PlacedTile place_tile(Size image, const Image& tile, const std::vector<std::uint8_t>& footprint,
                      int row, int col);

/// Gradient of a loss with respect to the tile given the gradient with
/// respect to the canvas.
Image canvas_gradient_to_tile(const Image& grad_canvas, const PlacedTile& placed, Size tile);

}  // namespace depthpatch

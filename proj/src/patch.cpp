#include "depthpatch/patch.hpp"

#include <algorithm>
#include <cmath>

#include "depthpatch/errors.hpp"

namespace depthpatch {

void Scene::validate() const {
  if (image.channels() != 3) throw InvalidArgument("scene image must have 3 channels");
  if (!image.within_unit_range()) {
    throw InvalidArgument("scene '" + identifier + "' has values outside [0,1]");
  }
  if (reference_depth && reference_depth->size() != image.size()) {
    throw DimensionMismatch("scene '" + identifier + "' reference depth size differs from image");
  }
}

Patch Patch::around(Image natural, double epsilon) {
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
  Patch patch;
  patch.perturbation = Image(natural.height(), natural.width(), natural.channels());
  patch.natural_base = std::move(natural);
  patch.epsilon = epsilon;
  return patch;
}

PatchMask::PatchMask(int height, int width)
    : height_(height), width_(width),
      values_(static_cast<std::size_t>(height) * width, 0) {}

void PatchMask::set(int row, int col, bool on) {
  values_[static_cast<std::size_t>(row) * width_ + col] = on ? 1 : 0;
}

std::size_t PatchMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

double PatchMask::area_ratio() const noexcept {
  if (values_.empty()) return 0.0;
  return static_cast<double>(count()) / static_cast<double>(values_.size());
}

void PatchMask::refresh_bounding_box() {
  int r0 = height_, c0 = width_, r1 = -1, c1 = -1;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (at(r, c)) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
    }
  }
  bbox_ = r1 < 0 ? Rect{} : Rect{r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

PatchMask PatchMask::complement() const {
  PatchMask out(height_, width_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] ? 0 : 1;
  out.refresh_bounding_box();
  return out;
}

Image compose_patch(const Patch& patch) {
  if (!patch.natural_base.same_shape(patch.perturbation)) {
    throw DimensionMismatch("natural base and perturbation differ in shape");
  }
  Image out = patch.natural_base;
  auto dst = out.values();
  auto delta = patch.perturbation.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::clamp(dst[i] + delta[i], 0.0, 1.0);
  return out;
}

Image apply_patch(const Image& scene, const Image& tile_canvas, const PatchMask& mask) {
  if (!scene.same_shape(tile_canvas) || mask.size() != scene.size()) {
    throw DimensionMismatch("apply_patch: scene, canvas and mask must share H x W");
  }
  Image out = scene;
  const int channels = scene.channels();
  for (int r = 0; r < scene.height(); ++r) {
    for (int c = 0; c < scene.width(); ++c) {
      if (!mask.at(r, c)) continue;
      for (int ch = 0; ch < channels; ++ch) out.at(r, c, ch) = tile_canvas.at(r, c, ch);
    }
  }
  return out;
}

Image apply_patch_canvas_gradient(const Image& grad_output, const PatchMask& mask) {
  if (mask.size() != grad_output.size()) {
    throw DimensionMismatch("apply_patch gradient: mask size differs");
  }
  Image grad(grad_output.height(), grad_output.width(), grad_output.channels());
  for (int r = 0; r < grad.height(); ++r) {
    for (int c = 0; c < grad.width(); ++c) {
      if (!mask.at(r, c)) continue;
      for (int ch = 0; ch < grad.channels(); ++ch) grad.at(r, c, ch) = grad_output.at(r, c, ch);
    }
  }
  return grad;
}

PatchMask make_mask(int image_height, int image_width, int row, int col, Size patch_pixels) {
  if (patch_pixels.height <= 0 || patch_pixels.width <= 0) {
    throw OutOfBounds("mask rectangle has zero area");
  }
  if (row < 0 || col < 0 || row + patch_pixels.height > image_height ||
      col + patch_pixels.width > image_width) {
    throw OutOfBounds("mask rectangle exceeds the image bounds");
  }
  PatchMask mask(image_height, image_width);
  for (int r = row; r < row + patch_pixels.height; ++r) {
    for (int c = col; c < col + patch_pixels.width; ++c) mask.set(r, c, true);
  }
  mask.refresh_bounding_box();
  return mask;
}

int side_for_scale(Size image, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("patch scale must be > 0");
  const double side = std::sqrt(scale * image.height * image.width);
  return std::max(1, static_cast<int>(std::lround(side)));
}

PlacedTile place_tile(Size image, const Image& tile, const std::vector<std::uint8_t>& footprint,
                      int row, int col) {
  if (footprint.size() != static_cast<std::size_t>(tile.height()) * tile.width()) {
    throw DimensionMismatch("footprint does not match tile");
  }
  PlacedTile placed{Image(image.height, image.width, tile.channels()),
                    PatchMask(image.height, image.width),
                    Rect{row, col, tile.height(), tile.width()}};
  for (int r = 0; r < tile.height(); ++r) {
    const int ir = row + r;
    if (ir < 0 || ir >= image.height) continue;
    for (int c = 0; c < tile.width(); ++c) {
      const int ic = col + c;
      if (ic < 0 || ic >= image.width) continue;
      if (!footprint[static_cast<std::size_t>(r) * tile.width() + c]) continue;
      placed.mask.set(ir, ic, true);
      for (int ch = 0; ch < tile.channels(); ++ch) placed.canvas.at(ir, ic, ch) = tile.at(r, c, ch);
    }
  }
  placed.mask.refresh_bounding_box();
  return placed;
}

Image canvas_gradient_to_tile(const Image& grad_canvas, const PlacedTile& placed, Size tile) {
  Image grad(tile.height, tile.width, grad_canvas.channels());
  const Rect& rect = placed.tile_rect;
  for (int r = 0; r < tile.height; ++r) {
    const int ir = rect.row + r;
    if (ir < 0 || ir >= grad_canvas.height()) continue;
    for (int c = 0; c < tile.width; ++c) {
      const int ic = rect.col + c;
      if (ic < 0 || ic >= grad_canvas.width()) continue;
      if (!placed.mask.at(ir, ic)) continue;
      for (int ch = 0; ch < grad.channels(); ++ch) grad.at(r, c, ch) = grad_canvas.at(ir, ic, ch);
    }
  }
  return grad;
}

}  // namespace depthpatch

#include "depthpatch/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "depthpatch/errors.hpp"

namespace depthpatch {

double TransformParams::retained_fraction(const TransformRanges& ranges) const {
  const double span = ranges.crop_max - ranges.crop_min;
  if (span <= 0.0 || ranges.crop_min >= 0.0) return 1.0;
  const double t = std::clamp((ranges.crop_max - crop_fraction) / span, 0.0, 1.0);
  return 1.0 + ranges.crop_min * t;
}

bool TransformParams::within(const TransformRanges& r) const {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  bool ok = in(noise_amplitude, 0.0, r.noise) &&
            in(rotation_deg, -r.rotation_deg, r.rotation_deg) &&
            in(brightness, -r.brightness, r.brightness) &&
            in(contrast, r.contrast_min, r.contrast_max) &&
            in(crop_fraction, r.crop_min, r.crop_max) && in(affine_strength, 0.0, r.affine) &&
            in(scale, r.scale_min, r.scale_max);
  for (double d : corner_draws) ok = ok && in(d, 0.0, 1.0);
  return ok;
}

TransformParams sample_transform(Rng& rng, const TransformRanges& r) {
  TransformParams p;
  p.noise_amplitude = r.noise;
  p.rotation_deg = rng.uniform(-r.rotation_deg, r.rotation_deg);
  p.brightness = rng.uniform(-r.brightness, r.brightness);
  p.contrast = rng.uniform(r.contrast_min, r.contrast_max);
  p.crop_fraction = rng.uniform(r.crop_min, r.crop_max);
  p.crop_edge = static_cast<CropEdge>(rng.uniform_int(0, 3));
  p.affine_strength = r.affine;
  for (double& d : p.corner_draws) d = rng.uniform();
  p.scale = rng.uniform(r.scale_min, r.scale_max);
  p.rng_seed = rng.fork_seed();
  return p;
}

std::vector<Image> build_mip_pyramid(const Image& pattern, int levels) {
  std::vector<Image> pyramid;
  pyramid.reserve(static_cast<std::size_t>(levels) + 1);
  pyramid.push_back(pattern);
  for (int l = 0; l < levels; ++l) pyramid.push_back(downsample2x(pyramid.back()));
  return pyramid;
}

namespace {

// Adjoint of downsample2x.
Image upsample_adjoint(const Image& grad_small, Size big) {
  Image grad(big.height, big.width, grad_small.channels());
  for (int r = 0; r < grad_small.height(); ++r) {
    const int r0 = 2 * r;
    const int r1 = std::min(2 * r + 1, big.height - 1);
    for (int c = 0; c < grad_small.width(); ++c) {
      const int c0 = 2 * c;
      const int c1 = std::min(2 * c + 1, big.width - 1);
      for (int ch = 0; ch < grad_small.channels(); ++ch) {
        const double g = 0.25 * grad_small.at(r, c, ch);
        grad.at(r0, c0, ch) += g;
        grad.at(r0, c1, ch) += g;
        grad.at(r1, c0, ch) += g;
        grad.at(r1, c1, ch) += g;
      }
    }
  }
  return grad;
}

struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  bool identity = true;

  // Maps unit-square tile coordinates (after inverse rotation) to pattern
  // coordinates. Destination corners are pulled inward by the draws.
  static Homography from_params(const TransformParams& p) {
    Homography h;
    const double reach = p.affine_strength / 4.0;
    if (reach <= 0.0) return h;
    const auto& d = p.corner_draws;
    const double dst[4][2] = {{d[0] * reach, d[1] * reach},
                              {1.0 - d[2] * reach, d[3] * reach},
                              {1.0 - d[4] * reach, 1.0 - d[5] * reach},
                              {d[6] * reach, 1.0 - d[7] * reach}};
    const double src[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 1> b;
    for (int k = 0; k < 4; ++k) {
      const double x = dst[k][0], y = dst[k][1], u = src[k][0], v = src[k][1];
      a.row(2 * k) << x, y, 1, 0, 0, 0, -u * x, -u * y;
      a.row(2 * k + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
      b(2 * k) = u;
      b(2 * k + 1) = v;
    }
    const Eigen::Matrix<double, 8, 1> sol = a.fullPivLu().solve(b);
    h.m << sol(0), sol(1), sol(2), sol(3), sol(4), sol(5), sol(6), sol(7), 1.0;
    h.identity = false;
    return h;
  }

  bool map(double x, double y, double& u, double& v) const {
    if (identity) {
      u = x;
      v = y;
      return true;
    }
    const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
    if (std::abs(w) < 1e-12) return false;
    u = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w;
    v = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w;
    return true;
  }
};

bool cropped(CropEdge edge, int row, int col, Size tile, int cut_rows, int cut_cols) {
  switch (edge) {
    case CropEdge::Top: return row < cut_rows;
    case CropEdge::Bottom: return row >= tile.height - cut_rows;
    case CropEdge::Left: return col < cut_cols;
    case CropEdge::Right: return col >= tile.width - cut_cols;
  }
  return false;
}

}  // namespace

TransformedTile apply_transform(const Image& pattern, const TransformParams& params, Size target,
                                const TransformRanges& ranges) {
  if (pattern.empty()) throw InvalidArgument("empty pattern");
  if (pattern.channels() > 4) throw InvalidArgument("patterns have at most 4 channels");
  const Size tile{static_cast<int>(std::lround(target.height * params.scale)),
                  static_cast<int>(std::lround(target.width * params.scale))};
  if (tile.height < 1 || tile.width < 1) {
    throw DegenerateGeometry("scaled tile is smaller than one pixel");
  }

  const double retained = params.retained_fraction(ranges);
  const bool vertical = params.crop_edge == CropEdge::Top || params.crop_edge == CropEdge::Bottom;
  const int cut_rows = vertical ? static_cast<int>(std::lround((1.0 - retained) * tile.height)) : 0;
  const int cut_cols = vertical ? 0 : static_cast<int>(std::lround((1.0 - retained) * tile.width));
  if (tile.height - cut_rows < 1 || tile.width - cut_cols < 1) {
    throw DegenerateGeometry("crop leaves less than one pixel");
  }

  // Coarsest mip level still at least as large as the tile.
  int level = 0;
  {
    int h = pattern.height(), w = pattern.width();
    while (h / 2 >= tile.height && w / 2 >= tile.width) {
      h /= 2;
      w /= 2;
      ++level;
    }
  }
  const std::vector<Image> pyramid = build_mip_pyramid(pattern, level);
  const Image& source = pyramid.back();
  const int channels = pattern.channels();

  TransformedTile out;
  out.level_ = level;
  out.channels_ = channels;
  out.contrast_ = params.contrast;
  for (const Image& img : pyramid) out.level_sizes_.push_back(img.size());
  out.tile_ = Image(tile.height, tile.width, channels);
  out.footprint_.assign(static_cast<std::size_t>(tile.height) * tile.width, 0);
  out.taps_.resize(out.footprint_.size());
  out.photometric_pass_.assign(out.tile_.numel(), 0);

  const Homography warp = Homography::from_params(params);
  const double theta = params.rotation_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const int src_h = source.height(), src_w = source.width();

  Rng noise_rng(params.rng_seed);
  const double amp = params.noise_amplitude;

  for (int i = 0; i < tile.height; ++i) {
    for (int j = 0; j < tile.width; ++j) {
      const std::size_t pix = static_cast<std::size_t>(i) * tile.width + j;
      // Inverse rotation about the tile centre, in pixel units.
      const double px = j + 0.5 - tile.width / 2.0;
      const double py = i + 0.5 - tile.height / 2.0;
      const double rx = cos_t * px + sin_t * py;
      const double ry = -sin_t * px + cos_t * py;
      const double qx = rx / tile.width + 0.5;
      const double qy = ry / tile.height + 0.5;

      double u = 0.0, v = 0.0;
      bool inside = warp.map(qx, qy, u, v) && u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0;
      inside = inside && !cropped(params.crop_edge, i, j, tile, cut_rows, cut_cols);

      double noise[4] = {0, 0, 0, 0};
      for (int ch = 0; ch < channels; ++ch) noise[ch] = noise_rng.uniform(-amp, amp);
      if (!inside) continue;

      const double x = std::clamp(u * src_w - 0.5, 0.0, src_w - 1.0);
      const double y = std::clamp(v * src_h - 0.5, 0.0, src_h - 1.0);
      const int x0 = static_cast<int>(std::floor(x));
      const int y0 = static_cast<int>(std::floor(y));
      const int x1 = std::min(x0 + 1, src_w - 1);
      const int y1 = std::min(y0 + 1, src_h - 1);
      const double fx = x - x0, fy = y - y0;

      TransformedTile::Tap tap;
      tap.index = {static_cast<std::uint32_t>(source.index(y0, x0, 0)),
                   static_cast<std::uint32_t>(source.index(y0, x1, 0)),
                   static_cast<std::uint32_t>(source.index(y1, x0, 0)),
                   static_cast<std::uint32_t>(source.index(y1, x1, 0))};
      tap.weight = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      out.taps_[pix] = tap;
      out.footprint_[pix] = 1;

      const auto src_values = source.values();
      for (int ch = 0; ch < channels; ++ch) {
        double geo = 0.0;
        for (int k = 0; k < 4; ++k) geo += tap.weight[k] * src_values[tap.index[k] + ch];
        const double value = params.contrast * geo + params.brightness + noise[ch];
        const std::size_t vi = pix * channels + ch;
        out.photometric_pass_[vi] = (value >= 0.0 && value <= 1.0) ? 1 : 0;
        out.tile_.values()[vi] = std::clamp(value, 0.0, 1.0);
      }
    }
  }
  if (std::none_of(out.footprint_.begin(), out.footprint_.end(), [](auto f) { return f != 0; })) {
    throw DegenerateGeometry("transform left no visible patch pixels");
  }
  return out;
}

Image TransformedTile::backward(const Image& grad_tile) const {
  if (grad_tile.size() != tile_.size() || grad_tile.channels() != channels_) {
    throw DimensionMismatch("tile gradient shape differs from tile");
  }
  const Size top = level_sizes_.back();
  Image grad(top.height, top.width, channels_);
  auto g = grad.values();
  const auto gt = grad_tile.values();
  for (std::size_t pix = 0; pix < footprint_.size(); ++pix) {
    if (!footprint_[pix]) continue;
    const Tap& tap = taps_[pix];
    for (int ch = 0; ch < channels_; ++ch) {
      const std::size_t vi = pix * channels_ + ch;
      if (!photometric_pass_[vi]) continue;
      const double upstream = gt[vi] * contrast_;
      for (int k = 0; k < 4; ++k) g[tap.index[k] + ch] += tap.weight[k] * upstream;
    }
  }
  for (int l = level_; l > 0; --l) grad = upsample_adjoint(grad, level_sizes_[l - 1]);
  return grad;
}

}  // namespace depthpatch

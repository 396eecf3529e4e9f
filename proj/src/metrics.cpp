#include "depthpatch/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "depthpatch/errors.hpp"

namespace depthpatch {

namespace {

void check(const DepthMap& a, const DepthMap& b, const PatchMask& mask) {
  if (a.height() != b.height() || a.width() != b.width() || a.height() != mask.height() ||
      a.width() != mask.width()) {
    throw DimensionMismatch("depth maps and mask must share a shape");
  }
  if (mask.count() == 0) throw EmptyMask("mask has no active pixels");
}

}  // namespace

double depth_error(const DepthMap& d_clean, const DepthMap& d_adv, const PatchMask& mask) {
  check(d_clean, d_adv, mask);
  const auto a = d_clean.values();
  const auto b = d_adv.values();
  const auto& m = mask.values();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    sum += std::abs(a[i] - b[i]);
    ++n;
  }
  return sum / static_cast<double>(n);
}

double affected_ratio(const DepthMap& d_clean, const DepthMap& d_adv, const PatchMask& mask,
                      double threshold) {
  check(d_clean, d_adv, mask);
  const auto a = d_clean.values();
  const auto b = d_adv.values();
  const auto& m = mask.values();
  std::size_t hit = 0, n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    if (std::abs(a[i] - b[i]) > threshold) ++hit;
    ++n;
  }
  return static_cast<double>(hit) / static_cast<double>(n);
}

namespace {

std::vector<double> gaussian_window(int length, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(length));
  const double centre = (length - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < length; ++i) {
    const double x = i - centre;
    w[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable valid-mode filtering of a single plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w,
                                 const std::vector<double>& wy, const std::vector<double>& wx) {
  const int oh = h - static_cast<int>(wy.size()) + 1;
  const int ow = w - static_cast<int>(wx.size()) + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < wx.size(); ++k) acc += wx[k] * plane[static_cast<std::size_t>(r) * w + c + k];
      rows[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < wy.size(); ++k) acc += wy[k] * rows[(r + k) * ow + c];
      out[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimOptions& options) {
  if (!a.same_shape(b)) throw DimensionMismatch("ssim needs equal shapes");
  if (a.numel() == 0) throw InvalidArgument("ssim of an empty image");
  if (options.window < 1 || options.sigma <= 0.0) throw InvalidArgument("bad ssim window");
  const int h = a.height(), w = a.width();
  const auto wy = gaussian_window(std::min(options.window, h), options.sigma);
  const auto wx = gaussian_window(std::min(options.window, w), options.sigma);
  const double c1 = std::pow(options.k1 * options.dynamic_range, 2);
  const double c2 = std::pow(options.k2 * options.dynamic_range, 2);

  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  double total = 0.0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        x[i] = a.at(r, c, ch);
        y[i] = b.at(r, c, ch);
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
    }
    const auto mx = filter_valid(x, h, w, wy, wx);
    const auto my = filter_valid(y, h, w, wy, wx);
    const auto sxx = filter_valid(xx, h, w, wy, wx);
    const auto syy = filter_valid(yy, h, w, wy, wx);
    const auto sxy = filter_valid(xy, h, w, wy, wx);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / a.channels();
}

}  // namespace depthpatch

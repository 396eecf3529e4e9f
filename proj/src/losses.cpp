#include "depthpatch/losses.hpp"

#include <cmath>

#include "depthpatch/errors.hpp"

namespace depthpatch {

namespace {

void check_depth_args(const DepthMap& a, const DepthMap& b, const PatchMask& mask) {
  if (a.size() != b.size() || a.size() != mask.size()) {
    throw DimensionMismatch("depth maps and mask must share H x W");
  }
}

double mask_count_or_throw(const PatchMask& mask) {
  const auto n = mask.count();
  if (n == 0) throw EmptyMask("mask has no active pixels");
  return static_cast<double>(n);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double tv_loss(const Image& p, double smoothing) {
  double total = 0.0;
  for (int ch = 0; ch < p.channels(); ++ch) {
    for (int i = 0; i + 1 < p.height(); ++i) {
      for (int j = 0; j + 1 < p.width(); ++j) {
        const double dv = p.at(i + 1, j, ch) - p.at(i, j, ch);
        const double dh = p.at(i, j + 1, ch) - p.at(i, j, ch);
        total += std::sqrt(dv * dv + dh * dh + smoothing);
      }
    }
  }
  return total;
}

std::size_t tv_term_count(const Image& p) {
  if (p.height() < 2 || p.width() < 2) return 0;
  return static_cast<std::size_t>(p.height() - 1) * (p.width() - 1) * p.channels();
}

Image tv_loss_gradient(const Image& p, double smoothing) {
  Image grad(p.height(), p.width(), p.channels());
  for (int ch = 0; ch < p.channels(); ++ch) {
    for (int i = 0; i + 1 < p.height(); ++i) {
      for (int j = 0; j + 1 < p.width(); ++j) {
        const double dv = p.at(i + 1, j, ch) - p.at(i, j, ch);
        const double dh = p.at(i, j + 1, ch) - p.at(i, j, ch);
        const double norm = std::sqrt(dv * dv + dh * dh + smoothing);
        if (norm == 0.0) continue;  // only reachable with smoothing == 0
        grad.at(i + 1, j, ch) += dv / norm;
        grad.at(i, j + 1, ch) += dh / norm;
        grad.at(i, j, ch) -= (dv + dh) / norm;
      }
    }
  }
  return grad;
}

double untargeted_depth_loss(const DepthMap& d_clean, const DepthMap& d_adv, const PatchMask& mask) {
  check_depth_args(d_clean, d_adv, mask);
  const double n = mask_count_or_throw(mask);
  double sum = 0.0;
  const auto& m = mask.values();
  const auto c = d_clean.values();
  const auto a = d_adv.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) sum += std::abs(c[i] - a[i]);
  }
  return -sum / n;
}

DepthMap untargeted_depth_loss_gradient(const DepthMap& d_clean, const DepthMap& d_adv,
                                        const PatchMask& mask) {
  check_depth_args(d_clean, d_adv, mask);
  const double n = mask_count_or_throw(mask);
  DepthMap grad(d_adv.height(), d_adv.width(), 0.0, d_adv.units());
  const auto& m = mask.values();
  const auto c = d_clean.values();
  const auto a = d_adv.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) g[i] = -sign(a[i] - c[i]) / n;
  }
  return grad;
}

double targeted_depth_loss(const DepthMap& d_adv, double c, const PatchMask& mask) {
  if (d_adv.size() != mask.size()) throw DimensionMismatch("depth map and mask must share H x W");
  const double n = mask_count_or_throw(mask);
  double sum = 0.0;
  const auto& m = mask.values();
  const auto a = d_adv.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) sum += std::abs(a[i] - c);
  }
  return sum / n;
}

DepthMap targeted_depth_loss_gradient(const DepthMap& d_adv, double c, const PatchMask& mask) {
  if (d_adv.size() != mask.size()) throw DimensionMismatch("depth map and mask must share H x W");
  const double n = mask_count_or_throw(mask);
  DepthMap grad(d_adv.height(), d_adv.width(), 0.0, d_adv.units());
  const auto& m = mask.values();
  const auto a = d_adv.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) g[i] = sign(a[i] - c) / n;
  }
  return grad;
}

}  // namespace depthpatch

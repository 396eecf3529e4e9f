#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "depthpatch/errors.hpp"
#include "depthpatch/transform.hpp"
#include "support.hpp"

using namespace depthpatch;

namespace {

TransformParams photometric_only(double contrast, double brightness) {
  TransformParams p = TransformParams::identity();
  p.contrast = contrast;
  p.brightness = brightness;
  return p;
}

}  // namespace

TEST(SampleTransform, DrawsStayInRange) {
  Rng rng(1);
  const TransformRanges ranges;
  double contrast_sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const TransformParams p = sample_transform(rng, ranges);
    ASSERT_TRUE(p.within(ranges));
    ASSERT_GE(p.rotation_deg, -20.0);
    ASSERT_LE(p.rotation_deg, 20.0);
    ASSERT_GE(p.scale, 0.25);
    ASSERT_LE(p.scale, 1.25);
    ASSERT_GE(p.retained_fraction(ranges), 0.3 - 1e-12);
    ASSERT_LE(p.retained_fraction(ranges), 1.0);
    contrast_sum += p.contrast;
  }
  EXPECT_NEAR(contrast_sum / 10000.0, 1.0, 0.01);
}

TEST(SampleTransform, DeterministicForSeed) {
  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) {
    const TransformParams x = sample_transform(a);
    const TransformParams y = sample_transform(b);
    EXPECT_EQ(x.rotation_deg, y.rotation_deg);
    EXPECT_EQ(x.scale, y.scale);
    EXPECT_EQ(x.corner_draws, y.corner_draws);
    EXPECT_EQ(x.rng_seed, y.rng_seed);
  }
}

TEST(TransformParams, CropMapping) {
  const TransformRanges r;
  TransformParams p;
  p.crop_fraction = r.crop_max;
  EXPECT_DOUBLE_EQ(p.retained_fraction(r), 1.0);
  p.crop_fraction = r.crop_min;
  EXPECT_DOUBLE_EQ(p.retained_fraction(r), 0.3);
}

TEST(ApplyTransform, IdentityIsExactAtPatternSize) {
  const Image pattern = support::random_image(64, 64, 3, 2);
  const TransformedTile t = apply_transform(pattern, TransformParams::identity(), {64, 64});
  ASSERT_EQ(t.size(), pattern.size());
  EXPECT_EQ(t.mip_level(), 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < pattern.numel(); ++i) {
    worst = std::max(worst, std::abs(t.tile().values()[i] - pattern.values()[i]));
  }
  EXPECT_LT(worst, 1e-6);
  for (auto f : t.footprint()) EXPECT_EQ(f, 1);
}

TEST(ApplyTransform, IdentityAtSmallerSizeIsResizedPattern) {
  const Image pattern(256, 256, 3, 0.37);
  const TransformedTile t = apply_transform(pattern, TransformParams::identity(), {29, 29});
  EXPECT_EQ(t.size(), (Size{29, 29}));
  EXPECT_EQ(t.mip_level(), 3);  // 256 -> 32 is the last level >= 29
  for (double v : t.tile().values()) EXPECT_NEAR(v, 0.37, 1e-12);
}

TEST(ApplyTransform, PhotometricFormula) {
  const Image pattern(32, 32, 3, 0.5);
  const TransformedTile t = apply_transform(pattern, photometric_only(1.2, 0.1), {32, 32});
  for (double v : t.tile().values()) EXPECT_NEAR(v, 0.7, 1e-12);
}

TEST(ApplyTransform, RotationMatchesRasterizedSquare) {
  const Image pattern(64, 64, 3, 1.0);
  TransformParams p = TransformParams::identity();
  p.rotation_deg = 20.0;
  const int n = 64;
  const TransformedTile t = apply_transform(pattern, p, {n, n});
  const auto& fp = t.footprint();
  EXPECT_EQ(fp[0], 0);
  EXPECT_EQ(fp[n - 1], 0);
  EXPECT_EQ(fp[static_cast<std::size_t>(n - 1) * n], 0);
  EXPECT_EQ(fp[static_cast<std::size_t>(n) * n - 1], 0);
  EXPECT_EQ(fp[static_cast<std::size_t>(n / 2) * n + n / 2], 1);

  // Independent oracle: pixel centre inside the square rotated by 20 degrees.
  const double th = 20.0 * std::numbers::pi / 180.0;
  int disagree = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = j + 0.5 - n / 2.0, y = i + 0.5 - n / 2.0;
      const double a = std::cos(th) * x + std::sin(th) * y;
      const double b = -std::sin(th) * x + std::cos(th) * y;
      const bool inside = std::abs(a) <= n / 2.0 && std::abs(b) <= n / 2.0;
      disagree += inside != (fp[static_cast<std::size_t>(i) * n + j] != 0);
    }
  }
  EXPECT_EQ(disagree, 0);
}

TEST(ApplyTransform, CropRemovesEdgeBand) {
  const Image pattern(40, 40, 3, 0.5);
  TransformParams p = TransformParams::identity();
  p.crop_fraction = -0.7;  // keep 30%
  p.crop_edge = CropEdge::Left;
  const TransformedTile t = apply_transform(pattern, p, {40, 40});
  int visible = 0;
  for (auto f : t.footprint()) visible += f;
  EXPECT_EQ(visible, 40 * 12);
  EXPECT_EQ(t.footprint()[0], 0);
  EXPECT_EQ(t.footprint()[39], 1);
}

TEST(ApplyTransform, TileStaysInUnitRange) {
  const Image pattern = support::random_image(64, 64, 3, 5);
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const TransformedTile t = apply_transform(pattern, sample_transform(rng), {32, 32});
    ASSERT_TRUE(t.tile().within_unit_range());
  }
}

TEST(ApplyTransform, DegenerateGeometry) {
  const Image pattern(16, 16, 3, 0.5);
  TransformParams p = TransformParams::identity();
  p.scale = 0.25;
  EXPECT_THROW(apply_transform(pattern, p, {1, 1}), DegenerateGeometry);
  p.scale = 1.0;
  p.crop_fraction = -0.7;
  p.crop_edge = CropEdge::Top;
  EXPECT_THROW(apply_transform(pattern, p, {1, 1}), DegenerateGeometry);
}

TEST(ApplyTransform, BackwardMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    Image pattern = support::random_image(48, 48, 3, 100 + trial, 0.3, 0.7);
    TransformParams p = sample_transform(rng);
    // Keep the photometric stage away from its clamp so the map is linear.
    p.noise_amplitude = 0.0;
    p.brightness = 0.0;
    p.contrast = 1.1;
    const Size target{20, 20};
    const TransformedTile t = apply_transform(pattern, p, target);
    const Image weights = support::random_image(t.size().height, t.size().width, 3, 200 + trial, -1, 1);
    auto objective = [&](const Image& pat) {
      const TransformedTile tt = apply_transform(pat, p, target);
      double s = 0.0;
      for (std::size_t i = 0; i < weights.numel(); ++i) s += weights.values()[i] * tt.tile().values()[i];
      return s;
    };
    const Image grad = t.backward(weights);
    ASSERT_TRUE(grad.same_shape(pattern));
    double num = 0.0, den = 0.0;
    const double h = 1e-4;
    for (std::size_t i = 0; i < pattern.numel(); i += 7) {
      const double saved = pattern.values()[i];
      pattern.values()[i] = saved + h;
      const double up = objective(pattern);
      pattern.values()[i] = saved - h;
      const double down = objective(pattern);
      pattern.values()[i] = saved;
      const double fd = (up - down) / (2 * h);
      num += (grad.values()[i] - fd) * (grad.values()[i] - fd);
      den += fd * fd;
    }
    EXPECT_LT(std::sqrt(num / std::max(den, 1e-30)), 1e-3) << "trial " << trial;
  }
}

TEST(MipPyramid, HalvesEachLevel) {
  const auto pyramid = build_mip_pyramid(Image(64, 48, 3, 0.2), 3);
  ASSERT_EQ(pyramid.size(), 4u);
  EXPECT_EQ(pyramid[3].size(), (Size{8, 6}));
  for (double v : pyramid[3].values()) EXPECT_NEAR(v, 0.2, 1e-15);
}

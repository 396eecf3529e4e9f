#include <gtest/gtest.h>

#include <cmath>

#include "depthpatch/errors.hpp"
#include "depthpatch/losses.hpp"
#include "support.hpp"

using namespace depthpatch;

namespace {

DepthMap depth_from(std::initializer_list<std::initializer_list<double>> rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.begin()->size());
  DepthMap d(h, w);
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) d.at(r, c++) = v;
    ++r;
  }
  return d;
}

PatchMask full_mask(int h, int w) { return PatchMask(h, w).complement(); }

}  // namespace

TEST(TvLoss, ConstantPatternIsZero) {
  EXPECT_EQ(tv_loss(Image(16, 16, 3, 0.4)), 0.0);
}

TEST(TvLoss, SingleCornerTerm) {
  Image p(2, 2, 1);
  p.at(0, 1, 0) = 1.0;
  p.at(1, 1, 0) = 1.0;
  EXPECT_DOUBLE_EQ(tv_loss(p), 1.0);
  EXPECT_EQ(tv_term_count(p), 1u);
}

TEST(TvLoss, OnePixelIsZero) {
  Image p(1, 1, 3, 0.7);
  EXPECT_EQ(tv_loss(p), 0.0);
  EXPECT_EQ(tv_term_count(p), 0u);
}

TEST(TvLoss, SumsOverChannels) {
  Image p(2, 2, 3);
  for (int ch = 0; ch < 3; ++ch) {
    p.at(0, 1, ch) = 1.0;
    p.at(1, 1, ch) = 1.0;
  }
  EXPECT_DOUBLE_EQ(tv_loss(p), 3.0);
  EXPECT_EQ(tv_term_count(Image(5, 4, 3)), 4u * 3u * 3u);
}

TEST(TvLoss, SmoothingChangesEachTermByLessThan1e4) {
  const Image p = support::random_image(8, 8, 3, 1);
  const double terms = static_cast<double>(tv_term_count(p));
  EXPECT_LT(std::abs(tv_loss(p, kTvSmoothing) - tv_loss(p)), 1e-4 * terms);
}

TEST(TvLoss, GradientMatchesFiniteDifferences) {
  for (int trial = 0; trial < 20; ++trial) {
    Image p = support::random_image(8, 8, 1 + trial % 3, 500 + trial);
    const Image g = tv_loss_gradient(p, kTvSmoothing);
    double num = 0.0, den = 0.0;
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double saved = p.values()[i];
      p.values()[i] = saved + h;
      const double up = tv_loss(p, kTvSmoothing);
      p.values()[i] = saved - h;
      const double down = tv_loss(p, kTvSmoothing);
      p.values()[i] = saved;
      const double fd = (up - down) / (2 * h);
      num += (g.values()[i] - fd) * (g.values()[i] - fd);
      den += fd * fd;
    }
    EXPECT_LT(std::sqrt(num / den), 1e-4) << "trial " << trial;
  }
}

TEST(UntargetedDepthLoss, Examples) {
  const DepthMap clean = depth_from({{0, 0}, {0, 0}});
  const DepthMap adv = depth_from({{1, 3}, {5, 7}});
  EXPECT_EQ(untargeted_depth_loss(clean, clean, full_mask(2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(untargeted_depth_loss(clean, adv, full_mask(2, 2)), -4.0);
  PatchMask top(2, 2);
  top.set(0, 0, true);
  top.set(0, 1, true);
  EXPECT_DOUBLE_EQ(untargeted_depth_loss(clean, adv, top), -2.0);
}

TEST(UntargetedDepthLoss, Errors) {
  const DepthMap a(2, 2);
  EXPECT_THROW(untargeted_depth_loss(a, a, PatchMask(2, 2)), EmptyMask);
  EXPECT_THROW(untargeted_depth_loss(a, DepthMap(2, 3), full_mask(2, 2)), DimensionMismatch);
  EXPECT_THROW(untargeted_depth_loss(a, a, full_mask(3, 2)), DimensionMismatch);
}

TEST(UntargetedDepthLoss, PermutationInvariantAndHomogeneous) {
  const DepthMap a = support::random_depth(6, 6, 1);
  const DepthMap b = support::random_depth(6, 6, 2);
  PatchMask m(6, 6);
  Rng rng(3);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) m.set(r, c, rng.uniform() < 0.5);
  m.set(0, 0, true);
  const double base = untargeted_depth_loss(a, b, m);

  // Reverse the pixel order in all three arrays.
  DepthMap ra(6, 6), rb(6, 6);
  PatchMask rm(6, 6);
  for (int i = 0; i < 36; ++i) {
    ra.values()[35 - i] = a.values()[i];
    rb.values()[35 - i] = b.values()[i];
    rm.set((35 - i) / 6, (35 - i) % 6, m.values()[i]);
  }
  EXPECT_NEAR(untargeted_depth_loss(ra, rb, rm), base, 1e-12);

  DepthMap ka = a, kb = b;
  for (double& v : ka.values()) v *= 2.5;
  for (double& v : kb.values()) v *= 2.5;
  EXPECT_NEAR(untargeted_depth_loss(ka, kb, m), 2.5 * base, 1e-12);
}

TEST(UntargetedDepthLoss, Gradient) {
  const DepthMap clean = depth_from({{1, 1}, {1, 1}});
  const DepthMap adv = depth_from({{2, 0}, {1, 5}});
  PatchMask m = full_mask(2, 2);
  m.set(1, 1, false);
  const DepthMap g = untargeted_depth_loss_gradient(clean, adv, m);
  EXPECT_DOUBLE_EQ(g.at(0, 0), -1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.at(0, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.at(1, 0), 0.0);  // sign(0) = 0
  EXPECT_DOUBLE_EQ(g.at(1, 1), 0.0);  // outside the mask
}

TEST(TargetedDepthLoss, Examples) {
  const DepthMap twos = depth_from({{2, 2}, {2, 2}});
  EXPECT_DOUBLE_EQ(targeted_depth_loss(twos, 2.0, full_mask(2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(targeted_depth_loss(twos, 1.0, full_mask(2, 2)), 1.0);
  DepthMap d = twos;
  d.at(1, 0) = 5.0;
  PatchMask one(2, 2);
  one.set(1, 0, true);
  EXPECT_DOUBLE_EQ(targeted_depth_loss(d, 20.0, one), 15.0);
  EXPECT_THROW(targeted_depth_loss(d, 1.0, PatchMask(2, 2)), EmptyMask);
  const DepthMap g = targeted_depth_loss_gradient(d, 20.0, one);
  EXPECT_DOUBLE_EQ(g.at(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(g.at(0, 0), 0.0);
}

TEST(TotalLoss, Arithmetic) {
  const LossWeights table{1.0, 0.5, std::nullopt};
  EXPECT_DOUBLE_EQ(total_loss(-4.0, 2.0, table), -3.0);
  EXPECT_EQ(total_loss(-4.0, 2.0, {1.5, 0.0, std::nullopt}), 1.5 * -4.0);
  EXPECT_EQ(total_loss(-4.0, 2.0, {0.0, 0.0, std::nullopt}), 0.0);
  EXPECT_EQ(table.mode(), AttackMode::Untargeted);
  EXPECT_EQ((LossWeights{1, 0.5, 20.0}).mode(), AttackMode::Targeted);
}

TEST(TotalLoss, LinearInComponents) {
  const LossWeights w{1.0, 0.5, std::nullopt};
  EXPECT_NEAR(total_loss(-1.0 + -2.0, 3.0, w), total_loss(-1.0, 3.0, w) + total_loss(-2.0, 0.0, w), 1e-15);
  EXPECT_NEAR(total_loss(-1.0, 3.0 + 4.0, w), total_loss(-1.0, 3.0, w) + total_loss(0.0, 4.0, w), 1e-15);
}

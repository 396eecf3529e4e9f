#include <gtest/gtest.h>

#include <cmath>

#include "depthpatch/projection.hpp"
#include "support.hpp"

using namespace depthpatch;

TEST(Project, InsideBallUnchanged) {
  const Image d(4, 4, 3, 0.01);
  const Image out = project(d, 0.03);
  for (double v : out.values()) EXPECT_EQ(v, 0.01);
}

TEST(Project, ClipsElements) {
  Image d(1, 2, 1);
  d.at(0, 0, 0) = 0.10;
  d.at(0, 1, 0) = -0.50;
  const Image out = project(d, 0.03);
  EXPECT_EQ(out.at(0, 0, 0), 0.03);
  EXPECT_EQ(out.at(0, 1, 0), -0.03);
}

TEST(Project, IdempotentAndLipschitz) {
  const Image a = support::random_image(8, 8, 3, 1, -1, 1);
  const Image b = support::random_image(8, 8, 3, 2, -1, 1);
  const Image pa = project(a, 0.2);
  const Image pb = project(b, 0.2);
  const Image ppa = project(pa, 0.2);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    EXPECT_EQ(ppa.values()[i], pa.values()[i]);
    EXPECT_LE(std::abs(pa.values()[i] - pb.values()[i]), std::abs(a.values()[i] - b.values()[i]));
  }
  EXPECT_LE(linf_norm(pa), 0.2);
}

TEST(ConstrainPatch, ValidPatchIsFixedPoint) {
  Patch p = Patch::around(Image(8, 8, 3, 0.5), 0.03);
  for (double& v : p.perturbation.values()) v = 0.02;
  const Patch out = constrain_patch(p);
  for (double v : out.perturbation.values()) EXPECT_EQ(v, 0.02);
}

TEST(ConstrainPatch, ClampIsFoldedIntoDelta) {
  Patch p = Patch::around(Image(4, 4, 3, 0.99), 0.03);
  for (double& v : p.perturbation.values()) v = 0.03;
  const Patch out = constrain_patch(p);
  for (double v : out.perturbation.values()) EXPECT_NEAR(v, 0.01, 1e-15);
  for (const auto& held = compose_patch(out); double v : held.values()) EXPECT_EQ(v, 1.0);
}

TEST(ConstrainPatch, ZeroRadiusGivesBase) {
  const Image base = support::random_image(8, 8, 3, 4);
  Patch p = Patch::around(base, 0.0);
  p.perturbation = support::random_image(8, 8, 3, 5, -1, 1);
  const Image out = compose_patch(constrain_patch(p));
  for (std::size_t i = 0; i < base.numel(); ++i) EXPECT_EQ(out.values()[i], base.values()[i]);
}

TEST(ConstrainPatch, RestoresBothInvariants) {
  for (int trial = 0; trial < 20; ++trial) {
    const double eps = 0.01 + 0.02 * trial;
    Patch p = Patch::around(support::random_image(16, 16, 3, 10 + trial), eps);
    p.perturbation = support::random_image(16, 16, 3, 40 + trial, -2, 2);
    const Patch out = constrain_patch(p);
    EXPECT_LE(linf_norm(out.perturbation), eps + 1e-12);
    EXPECT_TRUE(compose_patch(out).within_unit_range());
    for (std::size_t i = 0; i < out.perturbation.numel(); ++i) {
      const double composed = out.natural_base.values()[i] + out.perturbation.values()[i];
      EXPECT_GE(composed, 0.0);
      EXPECT_LE(composed, 1.0);
    }
  }
}

#include "depthpatch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "depthpatch/errors.hpp"
#include "depthpatch/rng.hpp"

namespace depthpatch {

std::vector<Scene> synthetic_scenes(int count, Size size, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("scene count must be positive");
  if (size.height < 8 || size.width < 8) throw InvalidArgument("scenes must be at least 8x8");
  Rng rng(seed);
  const int h = size.height, w = size.width;
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Scene scene{Image(h, w, 3), DepthMap(h, w, 0.0, "synthetic-metres"),
                "synthetic_" + std::to_string(k)};
    double base[3];
    for (double& b : base) b = rng.uniform(0.25, 0.75);
    // Far wall at the top (depth 10), floor running towards the camera (depth 2).
    for (int r = 0; r < h; ++r) {
      const double y = static_cast<double>(r) / (h - 1);
      for (int c = 0; c < w; ++c) {
        for (int ch = 0; ch < 3; ++ch) scene.image.at(r, c, ch) = base[ch] * (0.6 + 0.4 * y);
        scene.reference_depth->at(r, c) = 2.0 + 8.0 * (1.0 - y);
      }
    }
    // Upright boxes take the depth of the floor where they stand.
    for (int b = 0; b < 3; ++b) {
      const int bh = rng.uniform_int(h * 3 / 32, h * 5 / 16);
      const int bw = rng.uniform_int(w * 3 / 32, w * 5 / 16);
      const int r0 = rng.uniform_int(0, h - bh);
      const int c0 = rng.uniform_int(0, w - bw);
      double colour[3];
      for (double& v : colour) v = rng.uniform();
      const double depth = 2.0 + 8.0 * (1.0 - static_cast<double>(r0 + bh - 1) / (h - 1));
      for (int r = r0; r < r0 + bh; ++r) {
        const double y = static_cast<double>(r) / (h - 1);
        for (int c = c0; c < c0 + bw; ++c) {
          for (int ch = 0; ch < 3; ++ch) {
            scene.image.at(r, c, ch) = std::clamp(colour[ch] * (0.8 + 0.2 * y), 0.0, 1.0);
          }
          scene.reference_depth->at(r, c) = depth;
        }
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

Image synthetic_natural_base(std::uint64_t seed, int side) {
  if (side < 1) throw InvalidArgument("natural base side must be positive");
  Rng rng(seed);
  const double fx = rng.uniform(4.0, 8.0), fy = rng.uniform(3.0, 5.0), fxy = rng.uniform(7.0, 11.0);
  const double phase = rng.uniform(0.0, 6.283185307179586);
  Image image(side, side, 3);
  for (int r = 0; r < side; ++r) {
    const double y = side > 1 ? static_cast<double>(r) / (side - 1) : 0.0;
    for (int c = 0; c < side; ++c) {
      const double x = side > 1 ? static_cast<double>(c) / (side - 1) : 0.0;
      image.at(r, c, 0) = std::clamp(0.5 + 0.3 * std::sin(fx * x + phase) * std::cos(fy * y), 0.0, 1.0);
      image.at(r, c, 1) = std::clamp(0.4 + 0.3 * y, 0.0, 1.0);
      image.at(r, c, 2) = std::clamp(0.5 + 0.2 * std::cos(fxy * x * y), 0.0, 1.0);
    }
  }
  return image;
}

}  // namespace depthpatch

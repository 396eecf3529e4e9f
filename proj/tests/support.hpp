#pragma once

#include <cmath>
#include <functional>

#include "depthpatch/depth_model.hpp"
#include "depthpatch/rng.hpp"

namespace depthpatch::support {

inline Image random_image(int h, int w, int c, std::uint64_t seed, double lo = 0.0,
                          double hi = 1.0) {
  Rng rng(seed);
  Image image(h, w, c);
  for (double& v : image.values()) v = rng.uniform(lo, hi);
  return image;
}

inline DepthMap random_depth(int h, int w, std::uint64_t seed, double lo = 0.0, double hi = 10.0) {
  Rng rng(seed);
  DepthMap depth(h, w);
  for (double& v : depth.values()) v = rng.uniform(lo, hi);
  return depth;
}

/// depth(r, c) = bias + sum_ch weight[ch] * x(r, c, ch); exact gradients.
class LinearDepthModel final : public DepthModel {
 public:
  LinearDepthModel(Size size, double bias = 1.0) : size_(size), bias_(bias) {}

  std::string name() const override { return "linear"; }
  Size input_size() const override { return size_; }
  bool supports_input_gradients() const override { return true; }
  std::uint64_t weights_hash() const override { return 42; }

  double weight[3] = {1.0, -2.0, 0.5};

 protected:
  DepthMap forward(const Image& image) const override {
    DepthMap d(image.height(), image.width(), bias_);
    for (int r = 0; r < image.height(); ++r)
      for (int c = 0; c < image.width(); ++c)
        for (int ch = 0; ch < 3; ++ch) d.at(r, c) += weight[ch] * image.at(r, c, ch);
    return d;
  }
  Image backward(const Image& image, const Upstream& upstream) const override {
    const DepthMap g = upstream(forward(image));
    Image grad(image.height(), image.width(), 3);
    for (int r = 0; r < image.height(); ++r)
      for (int c = 0; c < image.width(); ++c)
        for (int ch = 0; ch < 3; ++ch) grad.at(r, c, ch) = weight[ch] * g.at(r, c);
    return grad;
  }

 private:
  Size size_;
  double bias_;
};

/// Forward-only model.
class OpaqueDepthModel final : public DepthModel {
 public:
  std::string name() const override { return "opaque"; }
  Size input_size() const override { return {8, 8}; }
  bool supports_input_gradients() const override { return false; }
  std::uint64_t weights_hash() const override { return 0; }

 protected:
  DepthMap forward(const Image& image) const override { return DepthMap(image.height(), image.width(), 1.0); }
  Image backward(const Image&, const Upstream&) const override { return {}; }
};

/// Emits a NaN at one pixel.
class NanDepthModel final : public DepthModel {
 public:
  std::string name() const override { return "nan"; }
  Size input_size() const override { return {8, 8}; }
  bool supports_input_gradients() const override { return true; }
  std::uint64_t weights_hash() const override { return 0; }

 protected:
  DepthMap forward(const Image& image) const override {
    DepthMap d(image.height(), image.width(), 1.0);
    d.at(0, 0) = std::nan("");
    return d;
  }
  Image backward(const Image& image, const Upstream& upstream) const override {
    upstream(forward(image));
    return Image(image.height(), image.width(), 3);
  }
};

}  // namespace depthpatch::support

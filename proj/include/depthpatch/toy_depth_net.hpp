#pragma once

#include <cstdint>
#include <vector>

#include "depthpatch/depth_model.hpp"
#include "depthpatch/rng.hpp"

namespace depthpatch {

namespace nn {

/// C x H x W planar tensor used inside the network.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
  const double* plane(int c) const {
    return data.data() + static_cast<std::size_t>(c) * height * width;
  }
};

/// 3x3 convolution, zero padding 1, stride 1 or 2.
struct Conv3x3 {
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  std::vector<double> weight;  // [out][in][3][3]
  std::vector<double> bias;    // [out]

  Conv3x3() = default;
  Conv3x3(int in, int out, int stride_, Rng& rng);

  Tensor forward(const Tensor& x) const;
  Tensor backward_input(const Tensor& grad_out, int in_height, int in_width) const;
  /// Accumulates into grad_weight / grad_bias.
  void backward_params(const Tensor& x, const Tensor& grad_out, std::vector<double>& grad_weight,
                       std::vector<double>& grad_bias) const;
};

Tensor upsample2x(const Tensor& x);
Tensor upsample2x_backward(const Tensor& grad_out, int in_height, int in_width);

}  // namespace nn

/// Small deterministic encoder-decoder standing in for a real depth
/// network: three encoder convolutions (two strided), two decoder
/// convolutions with bilinear upsampling, tanh activations and a softplus
/// head scaled to a 0..~20 depth range. Input 128x128.
class ToyDepthNet final : public DepthModel {
 public:
  static constexpr int kInputSide = 128;
  static constexpr double kDepthScale = 10.0;

  explicit ToyDepthNet(std::uint64_t seed = 7);

  std::string name() const override { return name_; }
  Size input_size() const override { return {kInputSide, kInputSide}; }
  bool supports_input_gradients() const override { return true; }
  std::uint64_t weights_hash() const override;
  std::string units() const override { return "toy-depth"; }

  /// Self-supervised warm-up: regress depth from synthetic brightness
  /// gradients (brighter = nearer) with Adam on the weights. This is the
  /// only place weights change, and it happens before any attack.
  void warm_up(int steps = 200, std::uint64_t seed = 11, double learning_rate = 1e-3);

  void set_name(std::string name) { name_ = std::move(name); }

  struct Activations;

 protected:
  DepthMap forward(const Image& image) const override;
  Image backward(const Image& image, const Upstream& upstream) const override;

 private:
  Activations run_forward(const Image& image) const;
  std::vector<nn::Conv3x3*> layers();

  std::string name_ = "toy";
  nn::Conv3x3 enc1_, enc2_, enc3_, dec1_, dec2_;
};

}  // namespace depthpatch

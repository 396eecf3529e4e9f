#include "depthpatch/toy_depth_net.hpp"

#include <algorithm>
#include <cmath>

#include "depthpatch/errors.hpp"

namespace depthpatch {

namespace nn {

namespace {

int conv_out(int n, int stride) { return (n - 1) / stride + 1; }

// Output index range [lo, hi) for which ix = o * stride + k - 1 is inside [0, n).
void valid_range(int k, int stride, int n, int out_n, int& lo, int& hi) {
  lo = std::max(0, (1 - k + stride - 1) / stride);
  hi = std::min(out_n, (n - k) / stride + 1);
}

}  // namespace

Conv3x3::Conv3x3(int in, int out, int stride_, Rng& rng)
    : in_channels(in), out_channels(out), stride(stride_),
      weight(static_cast<std::size_t>(out) * in * 9), bias(static_cast<std::size_t>(out)) {
  const double bound = std::sqrt(3.0 / (in * 9.0));
  for (double& w : weight) w = rng.uniform(-bound, bound);
  for (double& b : bias) b = rng.uniform(-0.1, 0.1);
}

Tensor Conv3x3::forward(const Tensor& x) const {
  const int oh = conv_out(x.height, stride), ow = conv_out(x.width, stride);
  Tensor y(out_channels, oh, ow);
  for (int oc = 0; oc < out_channels; ++oc) {
    double* out = y.plane(oc);
    std::fill(out, out + static_cast<std::size_t>(oh) * ow, bias[oc]);
    for (int ic = 0; ic < in_channels; ++ic) {
      const double* in = x.plane(ic);
      const double* w = &weight[(static_cast<std::size_t>(oc) * in_channels + ic) * 9];
      for (int ky = 0; ky < 3; ++ky) {
        int oy0, oy1;
        valid_range(ky, stride, x.height, oh, oy0, oy1);
        for (int kx = 0; kx < 3; ++kx) {
          int ox0, ox1;
          valid_range(kx, stride, x.width, ow, ox0, ox1);
          const double wk = w[ky * 3 + kx];
          for (int oy = oy0; oy < oy1; ++oy) {
            const double* row = in + static_cast<std::size_t>(oy * stride + ky - 1) * x.width;
            double* orow = out + static_cast<std::size_t>(oy) * ow;
            if (stride == 1) {
              const double* src = row + (kx - 1);
              for (int ox = ox0; ox < ox1; ++ox) orow[ox] += wk * src[ox];
            } else {
              for (int ox = ox0; ox < ox1; ++ox) orow[ox] += wk * row[ox * stride + kx - 1];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor Conv3x3::backward_input(const Tensor& g, int in_height, int in_width) const {
  Tensor gx(in_channels, in_height, in_width);
  for (int oc = 0; oc < out_channels; ++oc) {
    const double* go = g.plane(oc);
    for (int ic = 0; ic < in_channels; ++ic) {
      double* gi = gx.plane(ic);
      const double* w = &weight[(static_cast<std::size_t>(oc) * in_channels + ic) * 9];
      for (int ky = 0; ky < 3; ++ky) {
        int oy0, oy1;
        valid_range(ky, stride, in_height, g.height, oy0, oy1);
        for (int kx = 0; kx < 3; ++kx) {
          int ox0, ox1;
          valid_range(kx, stride, in_width, g.width, ox0, ox1);
          const double wk = w[ky * 3 + kx];
          for (int oy = oy0; oy < oy1; ++oy) {
            double* row = gi + static_cast<std::size_t>(oy * stride + ky - 1) * in_width;
            const double* grow = go + static_cast<std::size_t>(oy) * g.width;
            if (stride == 1) {
              double* dst = row + (kx - 1);
              for (int ox = ox0; ox < ox1; ++ox) dst[ox] += wk * grow[ox];
            } else {
              for (int ox = ox0; ox < ox1; ++ox) row[ox * stride + kx - 1] += wk * grow[ox];
            }
          }
        }
      }
    }
  }
  return gx;
}

void Conv3x3::backward_params(const Tensor& x, const Tensor& g, std::vector<double>& grad_weight,
                              std::vector<double>& grad_bias) const {
  for (int oc = 0; oc < out_channels; ++oc) {
    const double* go = g.plane(oc);
    double sum = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.height) * g.width; ++i) sum += go[i];
    grad_bias[oc] += sum;
    for (int ic = 0; ic < in_channels; ++ic) {
      const double* in = x.plane(ic);
      double* gw = &grad_weight[(static_cast<std::size_t>(oc) * in_channels + ic) * 9];
      for (int ky = 0; ky < 3; ++ky) {
        int oy0, oy1;
        valid_range(ky, stride, x.height, g.height, oy0, oy1);
        for (int kx = 0; kx < 3; ++kx) {
          int ox0, ox1;
          valid_range(kx, stride, x.width, g.width, ox0, ox1);
          double acc = 0.0;
          for (int oy = oy0; oy < oy1; ++oy) {
            const double* row = in + static_cast<std::size_t>(oy * stride + ky - 1) * x.width;
            const double* grow = go + static_cast<std::size_t>(oy) * g.width;
            for (int ox = ox0; ox < ox1; ++ox) acc += grow[ox] * row[ox * stride + kx - 1];
          }
          gw[ky * 3 + kx] += acc;
        }
      }
    }
  }
}

namespace {

struct Lerp {
  int i0, i1;
  double t;
};

std::vector<Lerp> upsample_coords(int in, int out) {
  std::vector<Lerp> coords(static_cast<std::size_t>(out));
  for (int o = 0; o < out; ++o) {
    const double src = std::max(0.0, (o + 0.5) * in / out - 0.5);
    const int i0 = std::min(static_cast<int>(std::floor(src)), in - 1);
    coords[o] = {i0, std::min(i0 + 1, in - 1), src - i0};
  }
  return coords;
}

}  // namespace

Tensor upsample2x(const Tensor& x) {
  Tensor y(x.channels, 2 * x.height, 2 * x.width);
  const auto ry = upsample_coords(x.height, y.height);
  const auto rx = upsample_coords(x.width, y.width);
  for (int c = 0; c < x.channels; ++c) {
    const double* in = x.plane(c);
    double* out = y.plane(c);
    for (int oy = 0; oy < y.height; ++oy) {
      const Lerp& ly = ry[oy];
      const double* r0 = in + static_cast<std::size_t>(ly.i0) * x.width;
      const double* r1 = in + static_cast<std::size_t>(ly.i1) * x.width;
      for (int ox = 0; ox < y.width; ++ox) {
        const Lerp& lx = rx[ox];
        const double top = (1 - lx.t) * r0[lx.i0] + lx.t * r0[lx.i1];
        const double bottom = (1 - lx.t) * r1[lx.i0] + lx.t * r1[lx.i1];
        out[static_cast<std::size_t>(oy) * y.width + ox] = (1 - ly.t) * top + ly.t * bottom;
      }
    }
  }
  return y;
}

Tensor upsample2x_backward(const Tensor& g, int in_height, int in_width) {
  Tensor gx(g.channels, in_height, in_width);
  const auto ry = upsample_coords(in_height, g.height);
  const auto rx = upsample_coords(in_width, g.width);
  for (int c = 0; c < g.channels; ++c) {
    const double* go = g.plane(c);
    double* gi = gx.plane(c);
    for (int oy = 0; oy < g.height; ++oy) {
      const Lerp& ly = ry[oy];
      double* r0 = gi + static_cast<std::size_t>(ly.i0) * in_width;
      double* r1 = gi + static_cast<std::size_t>(ly.i1) * in_width;
      for (int ox = 0; ox < g.width; ++ox) {
        const Lerp& lx = rx[ox];
        const double v = go[static_cast<std::size_t>(oy) * g.width + ox];
        r0[lx.i0] += (1 - ly.t) * (1 - lx.t) * v;
        r0[lx.i1] += (1 - ly.t) * lx.t * v;
        r1[lx.i0] += ly.t * (1 - lx.t) * v;
        r1[lx.i1] += ly.t * lx.t * v;
      }
    }
  }
  return gx;
}

}  // namespace nn

namespace {

using nn::Tensor;

Tensor to_tensor(const Image& image) {
  Tensor t(image.channels(), image.height(), image.width());
  for (int c = 0; c < image.channels(); ++c) {
    double* p = t.plane(c);
    for (int r = 0; r < image.height(); ++r)
      for (int col = 0; col < image.width(); ++col)
        p[static_cast<std::size_t>(r) * image.width() + col] = image.at(r, col, c);
  }
  return t;
}

Image to_image(const Tensor& t) {
  Image image(t.height, t.width, t.channels);
  for (int c = 0; c < t.channels; ++c) {
    const double* p = t.plane(c);
    for (int r = 0; r < t.height; ++r)
      for (int col = 0; col < t.width; ++col)
        image.at(r, col, c) = p[static_cast<std::size_t>(r) * t.width + col];
  }
  return image;
}

void tanh_inplace(Tensor& t) {
  for (double& v : t.data) v = std::tanh(v);
}

// grad *= 1 - a^2 where a = tanh(pre)
void tanh_backward(Tensor& grad, const Tensor& activation) {
  for (std::size_t i = 0; i < grad.data.size(); ++i) {
    grad.data[i] *= 1.0 - activation.data[i] * activation.data[i];
  }
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

struct ToyDepthNet::Activations {
  Tensor input, a1, a2, a3, up, a4, head, head_up;
};

ToyDepthNet::ToyDepthNet(std::uint64_t seed) {
  Rng rng(seed);
  enc1_ = nn::Conv3x3(3, 8, 2, rng);
  enc2_ = nn::Conv3x3(8, 16, 2, rng);
  enc3_ = nn::Conv3x3(16, 16, 1, rng);
  dec1_ = nn::Conv3x3(16, 8, 1, rng);
  dec2_ = nn::Conv3x3(8, 1, 1, rng);
}

std::vector<nn::Conv3x3*> ToyDepthNet::layers() { return {&enc1_, &enc2_, &enc3_, &dec1_, &dec2_}; }

std::uint64_t ToyDepthNet::weights_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const nn::Conv3x3* layer : {&enc1_, &enc2_, &enc3_, &dec1_, &dec2_}) {
    h = fnv1a(layer->weight, h);
    h = fnv1a(layer->bias, h);
  }
  return h;
}

ToyDepthNet::Activations ToyDepthNet::run_forward(const Image& image) const {
  Activations act;
  act.input = to_tensor(image);
  act.a1 = enc1_.forward(act.input);
  tanh_inplace(act.a1);
  act.a2 = enc2_.forward(act.a1);
  tanh_inplace(act.a2);
  act.a3 = enc3_.forward(act.a2);
  tanh_inplace(act.a3);
  act.up = nn::upsample2x(act.a3);
  act.a4 = dec1_.forward(act.up);
  tanh_inplace(act.a4);
  act.head = dec2_.forward(act.a4);
  act.head_up = nn::upsample2x(act.head);
  return act;
}

namespace {

DepthMap head_to_depth(const Tensor& head_up, double scale) {
  DepthMap depth(head_up.height, head_up.width);
  auto d = depth.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = scale * softplus(head_up.data[i]);
  return depth;
}

}  // namespace

DepthMap ToyDepthNet::forward(const Image& image) const {
  return head_to_depth(run_forward(image).head_up, kDepthScale);
}

Image ToyDepthNet::backward(const Image& image, const Upstream& upstream) const {
  const Activations act = run_forward(image);
  const DepthMap grad_depth = upstream(head_to_depth(act.head_up, kDepthScale));

  Tensor g(1, act.head_up.height, act.head_up.width);
  const auto gd = grad_depth.values();
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    g.data[i] = gd[i] * kDepthScale * sigmoid(act.head_up.data[i]);
  }
  g = nn::upsample2x_backward(g, act.head.height, act.head.width);
  g = dec2_.backward_input(g, act.a4.height, act.a4.width);
  tanh_backward(g, act.a4);
  g = dec1_.backward_input(g, act.up.height, act.up.width);
  g = nn::upsample2x_backward(g, act.a3.height, act.a3.width);
  tanh_backward(g, act.a3);
  g = enc3_.backward_input(g, act.a2.height, act.a2.width);
  tanh_backward(g, act.a2);
  g = enc2_.backward_input(g, act.a1.height, act.a1.width);
  tanh_backward(g, act.a1);
  g = enc1_.backward_input(g, act.input.height, act.input.width);
  return to_image(g);
}

namespace {

// Brightness ramp in a random direction with mild texture; target depth
// decreases with brightness.
void warm_up_sample(Rng& rng, Image& image, DepthMap& target) {
  const int n = ToyDepthNet::kInputSide;
  const double angle = rng.uniform(0.0, 6.283185307179586);
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double lo = rng.uniform(0.05, 0.4), hi = rng.uniform(0.6, 0.95);
  const double tint[3] = {rng.uniform(0.8, 1.0), rng.uniform(0.8, 1.0), rng.uniform(0.8, 1.0)};
  image = Image(n, n, 3);
  target = DepthMap(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double u = ((c + 0.5) / n - 0.5) * dx + ((r + 0.5) / n - 0.5) * dy;
      const double lum = std::clamp(lo + (hi - lo) * (u + 0.7071) / 1.4142, 0.0, 1.0);
      for (int ch = 0; ch < 3; ++ch) {
        image.at(r, c, ch) = std::clamp(lum * tint[ch] + rng.uniform(-0.02, 0.02), 0.0, 1.0);
      }
      target.at(r, c) = 1.0 + 9.0 * (1.0 - lum);
    }
  }
}

}  // namespace

void ToyDepthNet::warm_up(int steps, std::uint64_t seed, double learning_rate) {
  Rng rng(seed);
  std::vector<nn::Conv3x3*> params = layers();
  struct Moments {
    std::vector<double> mw, vw, mb, vb, gw, gb;
  };
  std::vector<Moments> moments(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto nw = params[k]->weight.size(), nb = params[k]->bias.size();
    moments[k] = {std::vector<double>(nw), std::vector<double>(nw), std::vector<double>(nb),
                  std::vector<double>(nb), std::vector<double>(nw), std::vector<double>(nb)};
  }
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Image image;
  DepthMap target;
  for (int step = 1; step <= steps; ++step) {
    warm_up_sample(rng, image, target);
    const Activations act = run_forward(image);
    const DepthMap pred = head_to_depth(act.head_up, kDepthScale);
    const double n = static_cast<double>(pred.numel());

    Tensor g(1, act.head_up.height, act.head_up.width);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const double diff = pred.values()[i] - target.values()[i];
      g.data[i] = 2.0 * diff / n * kDepthScale * sigmoid(act.head_up.data[i]);
    }
    for (auto& m : moments) {
      std::fill(m.gw.begin(), m.gw.end(), 0.0);
      std::fill(m.gb.begin(), m.gb.end(), 0.0);
    }
    g = nn::upsample2x_backward(g, act.head.height, act.head.width);
    dec2_.backward_params(act.a4, g, moments[4].gw, moments[4].gb);
    g = dec2_.backward_input(g, act.a4.height, act.a4.width);
    tanh_backward(g, act.a4);
    dec1_.backward_params(act.up, g, moments[3].gw, moments[3].gb);
    g = dec1_.backward_input(g, act.up.height, act.up.width);
    g = nn::upsample2x_backward(g, act.a3.height, act.a3.width);
    tanh_backward(g, act.a3);
    enc3_.backward_params(act.a2, g, moments[2].gw, moments[2].gb);
    g = enc3_.backward_input(g, act.a2.height, act.a2.width);
    tanh_backward(g, act.a2);
    enc2_.backward_params(act.a1, g, moments[1].gw, moments[1].gb);
    g = enc2_.backward_input(g, act.a1.height, act.a1.width);
    tanh_backward(g, act.a1);
    enc1_.backward_params(act.input, g, moments[0].gw, moments[0].gb);

    const double c1 = 1.0 - std::pow(b1, step), c2 = 1.0 - std::pow(b2, step);
    auto adam = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                    const std::vector<double>& grad) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = b1 * m[i] + (1 - b1) * grad[i];
        v[i] = b2 * v[i] + (1 - b2) * grad[i] * grad[i];
        p[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      }
    };
    for (std::size_t k = 0; k < params.size(); ++k) {
      adam(params[k]->weight, moments[k].mw, moments[k].vw, moments[k].gw);
      adam(params[k]->bias, moments[k].mb, moments[k].vb, moments[k].gb);
    }
  }
}

}  // namespace depthpatch

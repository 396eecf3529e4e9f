#include "depthpatch/defenses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "depthpatch/errors.hpp"
#include "depthpatch/image_io.hpp"
#include "depthpatch/rng.hpp"

namespace depthpatch {

Image jpeg_compress(const Image& image, int quality) {
  if (quality < 1 || quality > 100) throw CodecError("JPEG quality must be in 1..100");
  if (image.channels() != 3) throw CodecError("JPEG defense expects an RGB image");
  try {
    Image out = decode_jpeg(encode_jpeg(image, quality));
    if (!out.same_shape(image)) throw CodecError("JPEG round-trip changed the shape");
    return out;
  } catch (const UnreadableFile& e) {
    throw CodecError(e.what());
  }
}

int effective_median_kernel(int kernel) {
  if (kernel < 1) throw InvalidArgument("median kernel must be >= 1");
  return kernel % 2 == 0 ? kernel + 1 : kernel;
}

namespace {

// Reflect-101 index: -1 -> 1, n -> n - 2.
int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

Image median_blur(const Image& image, int kernel) {
  const int k = effective_median_kernel(kernel);
  if (k == 1) return image;
  const int radius = k / 2;
  const int h = image.height(), w = image.width();
  Image out(h, w, image.channels());
  std::vector<double> window(static_cast<std::size_t>(k) * k);
  const std::size_t mid = window.size() / 2;
  for (int ch = 0; ch < image.channels(); ++ch) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        std::size_t n = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int rr = reflect101(r + dy, h);
          for (int dx = -radius; dx <= radius; ++dx) {
            window[n++] = image.at(rr, reflect101(c + dx, w), ch);
          }
        }
        std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid), window.end());
        out.at(r, c, ch) = window[mid];
      }
    }
  }
  return out;
}

Image gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (sigma == 0.0) return image;
  Rng rng(seed);
  Image out = image;
  for (double& v : out.values()) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
  return out;
}

std::string Defense::name() const {
  switch (kind) {
    case DefenseKind::None: return "none";
    case DefenseKind::Jpeg: return "jpeg";
    case DefenseKind::Median: return "median";
    case DefenseKind::Gaussian: return "gaussian";
  }
  return "none";
}

Defense Defense::parse(const std::string& text) {
  if (text == "none" || text.empty()) return {};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("defense needs kind:parameter, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string value = text.substr(colon + 1);
  double parameter = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parameter);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad defense parameter in '" + text + "'");
  }
  if (kind == "jpeg") {
    if (parameter < 1 || parameter > 100 || parameter != std::floor(parameter)) {
      throw ConfigError("jpeg quality must be an integer in 1..100");
    }
    return {DefenseKind::Jpeg, parameter};
  }
  if (kind == "median") {
    if (parameter < 1 || parameter != std::floor(parameter)) {
      throw ConfigError("median kernel must be a positive integer");
    }
    return {DefenseKind::Median, parameter};
  }
  if (kind == "gaussian") {
    if (parameter < 0) throw ConfigError("gaussian sigma must be >= 0");
    return {DefenseKind::Gaussian, parameter};
  }
  throw ConfigError("unknown defense '" + kind + "'");
}

Image Defense::apply(const Image& image, std::uint64_t seed) const {
  switch (kind) {
    case DefenseKind::None: return image;
    case DefenseKind::Jpeg: return jpeg_compress(image, static_cast<int>(parameter));
    case DefenseKind::Median: return median_blur(image, static_cast<int>(parameter));
    case DefenseKind::Gaussian: return gaussian_noise(image, parameter, seed);
  }
  return image;
}

}  // namespace depthpatch

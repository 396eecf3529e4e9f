#include "depthpatch/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "depthpatch/errors.hpp"

namespace depthpatch {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) {
    throw InvalidArgument("negative image dimension");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

bool Image::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Image::within_unit_range() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

DepthMap::DepthMap(int height, int width, double fill, std::string units)
    : height_(height), width_(width), units_(std::move(units)) {
  if (height < 0 || width < 0) throw InvalidArgument("negative depth-map dimension");
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

bool DepthMap::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Image downsample2x(const Image& src) {
  const int h = std::max(1, src.height() / 2);
  const int w = std::max(1, src.width() / 2);
  Image out(h, w, src.channels());
  for (int r = 0; r < h; ++r) {
    const int r0 = 2 * r;
    const int r1 = std::min(2 * r + 1, src.height() - 1);
    for (int c = 0; c < w; ++c) {
      const int c0 = 2 * c;
      const int c1 = std::min(2 * c + 1, src.width() - 1);
      for (int ch = 0; ch < src.channels(); ++ch) {
        out.at(r, c, ch) = 0.25 * (src.at(r0, c0, ch) + src.at(r0, c1, ch) +
                                   src.at(r1, c0, ch) + src.at(r1, c1, ch));
      }
    }
  }
  return out;
}

Image resize(const Image& input, Size target) {
  if (target.height <= 0 || target.width <= 0) {
    throw InvalidArgument("resize target must be positive");
  }
  if (input.size() == target) return input;
  Image src = input;
  while (src.height() >= 2 * target.height && src.width() >= 2 * target.width) {
    src = downsample2x(src);
  }
  Image out(target.height, target.width, src.channels());
  const double sy = static_cast<double>(src.height()) / target.height;
  const double sx = static_cast<double>(src.width()) / target.width;
  for (int r = 0; r < target.height; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double fy = y - y0;
    for (int c = 0; c < target.width; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double fx = x - x0;
      for (int ch = 0; ch < src.channels(); ++ch) {
        const double top = (1 - fx) * src.at(y0, x0, ch) + fx * src.at(y0, x1, ch);
        const double bottom = (1 - fx) * src.at(y1, x0, ch) + fx * src.at(y1, x1, ch);
        out.at(r, c, ch) = (1 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

std::uint64_t fnv1a_bytes(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t hash = seed;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed) {
  return fnv1a_bytes(std::span<const unsigned char>(
                         reinterpret_cast<const unsigned char*>(values.data()), values.size_bytes()),
                     seed);
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace depthpatch

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace depthpatch {

struct Size {
  int height = 0;
  int width = 0;
  friend bool operator==(const Size&, const Size&) = default;
};

struct Rect {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Channels-last float image. Values are nominally in [0,1] but the type
// itself only stores numbers; range invariants belong to the callers.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  Size size() const noexcept { return {height_, width_}; }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int row, int col, int ch) {
    return data_[index(row, col, ch)];
  }
  double at(int row, int col, int ch) const {
    return data_[index(row, col, ch)];
  }
  std::size_t index(int row, int col, int ch) const noexcept {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  bool all_finite() const noexcept;
  bool within_unit_range() const noexcept;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Per-pixel depth in whatever units the producing model emits.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int height, int width, double fill = 0.0, std::string units = "relative");

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  Size size() const noexcept { return {height_, width_}; }
  std::size_t numel() const noexcept { return data_.size(); }

  double& at(int row, int col) {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  double at(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  const std::string& units() const noexcept { return units_; }
  void set_units(std::string units) { units_ = std::move(units); }

  bool all_finite() const noexcept;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
  std::string units_ = "relative";
};

/// 2x2 box average; an odd trailing row/column is dropped.
Image downsample2x(const Image& src);

/// Bilinear resize with area prefiltering when shrinking. Used on ingest
/// and for the toy scenes; not part of any differentiable path.
Image resize(const Image& src, Size target);

/// 64-bit FNV-1a over the bytes of a double span.
std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed = 1469598103934665603ull);
std::uint64_t fnv1a_bytes(std::span<const unsigned char> bytes,
                          std::uint64_t seed = 1469598103934665603ull);
std::string hex64(std::uint64_t value);

}  // namespace depthpatch

#pragma once

#include <filesystem>
#include <vector>

#include "depthpatch/image.hpp"

namespace depthpatch {

/// Decode a PNG or JPEG file (by signature) to RGB in [0,1].
/// UnreadableFile on any failure.
Image read_image(const std::filesystem::path& path);

/// 16-bit or 8-bit single-channel PNG scaled by `scale` (e.g. 1/1000 for
/// millimetre depth).
DepthMap read_depth_png(const std::filesystem::path& path, double scale);

/// round(clamp(x) * 255) per value.
std::vector<unsigned char> quantize8(const Image& image);
Image dequantize8(const std::vector<unsigned char>& bytes, int height, int width, int channels);

/// 8-bit RGB (or gray for 1 channel) PNG in memory.
std::vector<unsigned char> encode_png(const Image& image);
Image decode_png(const std::vector<unsigned char>& bytes);

/// Baseline RGB JPEG at quality 1..100 (libjpeg defaults otherwise).
std::vector<unsigned char> encode_jpeg(const Image& image, int quality);
Image decode_jpeg(const std::vector<unsigned char>& bytes);

/// Write bytes to `path` through a temporary file and a rename.
void atomic_write(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
void atomic_write(const std::filesystem::path& path, const std::string& text);

void write_png(const std::filesystem::path& path, const Image& image);

std::vector<unsigned char> read_file(const std::filesystem::path& path);

}  // namespace depthpatch

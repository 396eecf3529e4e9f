#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "depthpatch/patch.hpp"

namespace depthpatch {

std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

/// Little-endian float32 packing of an image (lossless for float32 values).
std::vector<unsigned char> pack_float32(const Image& image);
Image unpack_float32(const std::vector<unsigned char>& bytes, int height, int width, int channels);

/// Round every value through float32 so a saved patch reloads bit-exactly.
Image round_to_float32(const Image& image);

/// Content hash of an image (FNV-1a over float32 bytes), hex.
std::string content_hash(const Image& image);

/// Patch on disk: the composed pattern as an 8-bit RGB PNG, plus a JSON
/// sidecar with epsilon, natural-image hash, PNG pixel hash, float32
/// natural base and perturbation (base64), and the generating config.
void save_patch(const Patch& patch, const nlohmann::json& generating_config,
                const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path);

struct LoadedPatch {
  Patch patch;
  nlohmann::json sidecar;
};

/// SidecarMismatch when the PNG pixels, the stored arrays or the hashes
/// disagree; UnreadableFile when either file cannot be read.
LoadedPatch load_patch(const std::filesystem::path& png_path,
                       const std::filesystem::path& sidecar_path);

}  // namespace depthpatch

#include "depthpatch/persistence.hpp"

#include <bit>
#include <cstring>

#include "depthpatch/errors.hpp"
#include "depthpatch/image_io.hpp"
#include "depthpatch/projection.hpp"

namespace depthpatch {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw InvalidArgument("base64 length must be a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad) throw InvalidArgument("misplaced base64 padding");
      v[k] = decode_char(c);
      if (v[k] < 0) throw InvalidArgument("invalid base64 character");
    }
    const std::uint32_t word = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<unsigned char>(word >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>((word >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<unsigned char>(word & 0xFF));
  }
  return out;
}

std::vector<unsigned char> pack_float32(const Image& image) {
  std::vector<unsigned char> out(image.numel() * 4);
  std::size_t o = 0;
  for (double v : image.values()) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int k = 0; k < 4; ++k) out[o++] = static_cast<unsigned char>((bits >> (8 * k)) & 0xFF);
  }
  return out;
}

Image unpack_float32(const std::vector<unsigned char>& bytes, int height, int width, int channels) {
  Image image(height, width, channels);
  if (bytes.size() != image.numel() * 4) throw DimensionMismatch("float32 payload does not match shape");
  auto v = image.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[4 * i + k]) << (8 * k);
    v[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return image;
}

Image round_to_float32(const Image& image) {
  Image out = image;
  for (double& v : out.values()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

std::string content_hash(const Image& image) { return hex64(fnv1a_bytes(pack_float32(image))); }

namespace {

Patch float32_patch(const Patch& patch) {
  Patch out = patch;
  out.natural_base = round_to_float32(patch.natural_base);
  out.perturbation = round_to_float32(patch.perturbation);
  return out;
}

}  // namespace

void save_patch(const Patch& patch, const nlohmann::json& generating_config,
                const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path) {
  if (!patch.natural_base.same_shape(patch.perturbation)) {
    throw DimensionMismatch("natural base and perturbation differ in shape");
  }
  const Patch stored = float32_patch(patch);
  const std::vector<unsigned char> pixels = quantize8(compose_patch(stored));
  nlohmann::json sidecar = {
      {"format", "depthpatch-patch"},
      {"version", 1},
      {"height", stored.natural_base.height()},
      {"width", stored.natural_base.width()},
      {"channels", stored.natural_base.channels()},
      {"epsilon", stored.epsilon},
      {"natural_hash", content_hash(stored.natural_base)},
      {"perturbation_hash", content_hash(stored.perturbation)},
      {"png_pixel_hash", hex64(fnv1a_bytes(pixels))},
      {"natural_base_f32", base64_encode(pack_float32(stored.natural_base))},
      {"perturbation_f32", base64_encode(pack_float32(stored.perturbation))},
      {"config", generating_config},
  };
  atomic_write(png_path, encode_png(compose_patch(stored)));
  atomic_write(sidecar_path, sidecar.dump(2) + "\n");
}

LoadedPatch load_patch(const std::filesystem::path& png_path,
                       const std::filesystem::path& sidecar_path) {
  const std::vector<unsigned char> png_bytes = read_file(png_path);
  const std::vector<unsigned char> sidecar_bytes = read_file(sidecar_path);
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(sidecar_bytes.begin(), sidecar_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw UnreadableFile("sidecar is not valid JSON: " + std::string(e.what()));
  }
  Image pattern;
  try {
    pattern = decode_png(png_bytes);
  } catch (const UnreadableFile& e) {
    throw UnreadableFile(png_path.string() + ": " + e.what());
  }
  try {
    const int h = sidecar.at("height").get<int>();
    const int w = sidecar.at("width").get<int>();
    const int c = sidecar.at("channels").get<int>();
    if (pattern.height() != h || pattern.width() != w || pattern.channels() != c) {
      throw SidecarMismatch("PNG shape does not match the sidecar");
    }
    const std::vector<unsigned char> pixels = quantize8(pattern);
    if (hex64(fnv1a_bytes(pixels)) != sidecar.at("png_pixel_hash").get<std::string>()) {
      throw SidecarMismatch("PNG pixels do not match the sidecar hash");
    }
    Patch patch;
    patch.epsilon = sidecar.at("epsilon").get<double>();
    patch.natural_base =
        unpack_float32(base64_decode(sidecar.at("natural_base_f32").get<std::string>()), h, w, c);
    patch.perturbation =
        unpack_float32(base64_decode(sidecar.at("perturbation_f32").get<std::string>()), h, w, c);
    if (content_hash(patch.natural_base) != sidecar.at("natural_hash").get<std::string>() ||
        content_hash(patch.perturbation) != sidecar.at("perturbation_hash").get<std::string>()) {
      throw SidecarMismatch("stored arrays do not match their hashes");
    }
    if (quantize8(compose_patch(patch)) != pixels) {
      throw SidecarMismatch("PNG pixels disagree with the stored perturbation");
    }
    return {std::move(patch), std::move(sidecar)};
  } catch (const nlohmann::json::exception& e) {
    throw SidecarMismatch("sidecar is missing fields: " + std::string(e.what()));
  } catch (const DimensionMismatch& e) {
    throw SidecarMismatch(e.what());
  } catch (const InvalidArgument& e) {
    throw SidecarMismatch(e.what());
  }
}

}  // namespace depthpatch

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "depthpatch/errors.hpp"
#include "depthpatch/image_io.hpp"
#include "depthpatch/persistence.hpp"
#include "support.hpp"

using namespace depthpatch;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("depthpatch_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Patch sample_patch() {
  Patch p = Patch::around(support::random_image(16, 12, 3, 1, 0.1, 0.9), 0.03);
  Rng rng(2);
  for (double& v : p.perturbation.values()) v = rng.uniform(-0.03, 0.03);
  return p;
}

}  // namespace

TEST(Png, EightBitRoundTripIsExact) {
  Image image = dequantize8(quantize8(support::random_image(10, 9, 3, 3)), 10, 9, 3);
  const Image back = decode_png(encode_png(image));
  ASSERT_TRUE(back.same_shape(image));
  for (std::size_t i = 0; i < image.numel(); ++i) EXPECT_EQ(back.values()[i], image.values()[i]);
}

TEST(Png, QuantizeRoundsAndClamps) {
  Image image(1, 1, 3);
  image.at(0, 0, 0) = -0.5;
  image.at(0, 0, 1) = 0.5;
  image.at(0, 0, 2) = 1.5;
  const auto q = quantize8(image);
  EXPECT_EQ(q[0], 0);
  EXPECT_EQ(q[1], 128);
  EXPECT_EQ(q[2], 255);
}

TEST(Png, ReadImageAndDepth) {
  const fs::path dir = scratch_dir("read");
  const Image image = dequantize8(quantize8(support::random_image(8, 8, 3, 4)), 8, 8, 3);
  write_png(dir / "a.png", image);
  const Image back = read_image(dir / "a.png");
  EXPECT_EQ(back.values()[5], image.values()[5]);
  atomic_write(dir / "bad.png", std::string("not an image"));
  EXPECT_THROW(read_image(dir / "bad.png"), UnreadableFile);
  EXPECT_THROW(read_image(dir / "missing.png"), UnreadableFile);
  const Image gray(4, 4, 1, 100.0 / 255.0);
  write_png(dir / "d.png", gray);
  const DepthMap depth = read_depth_png(dir / "d.png", 0.5);
  EXPECT_DOUBLE_EQ(depth.at(2, 2), 50.0);
}

TEST(Jpeg, EncodeDecode) {
  const Image image(16, 16, 3, 0.5);
  const Image back = decode_jpeg(encode_jpeg(image, 95));
  ASSERT_TRUE(back.same_shape(image));
  EXPECT_NEAR(back.at(8, 8, 1), 0.5, 2.0 / 255.0);
}

TEST(Base64, KnownVectorsAndRoundTrip) {
  auto enc = [](const std::string& s) {
    return base64_encode(std::vector<unsigned char>(s.begin(), s.end()));
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
  std::vector<unsigned char> bytes(256);
  for (int i = 0; i < 256; ++i) bytes[i] = static_cast<unsigned char>(i);
  EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  EXPECT_THROW(base64_decode("abc"), InvalidArgument);
  EXPECT_THROW(base64_decode("ab!d"), InvalidArgument);
}

TEST(Float32, PackIsLosslessForFloatValues) {
  const Image image = round_to_float32(support::random_image(3, 4, 3, 5));
  const Image back = unpack_float32(pack_float32(image), 3, 4, 3);
  for (std::size_t i = 0; i < image.numel(); ++i) EXPECT_EQ(back.values()[i], image.values()[i]);
  EXPECT_THROW(unpack_float32(pack_float32(image), 3, 4, 1), DimensionMismatch);
}

TEST(Persistence, SaveLoadRoundTrip) {
  const fs::path dir = scratch_dir("roundtrip");
  const Patch patch = sample_patch();
  save_patch(patch, {{"seed", 7}}, dir / "p.png", dir / "p.json");
  const LoadedPatch loaded = load_patch(dir / "p.png", dir / "p.json");
  EXPECT_EQ(loaded.patch.epsilon, 0.03);
  EXPECT_EQ(loaded.sidecar.at("config").at("seed"), 7);
  const Image expected_delta = round_to_float32(patch.perturbation);
  for (std::size_t i = 0; i < patch.perturbation.numel(); ++i) {
    EXPECT_EQ(loaded.patch.perturbation.values()[i], expected_delta.values()[i]);
  }
  // Saving what was loaded reproduces the same files.
  save_patch(loaded.patch, loaded.sidecar.at("config"), dir / "q.png", dir / "q.json");
  EXPECT_EQ(read_file(dir / "p.png"), read_file(dir / "q.png"));
  EXPECT_EQ(read_file(dir / "p.json"), read_file(dir / "q.json"));
  EXPECT_FALSE(fs::exists(dir / "p.png.tmp"));
}

TEST(Persistence, TamperedPngIsRejected) {
  const fs::path dir = scratch_dir("tamper");
  save_patch(sample_patch(), nlohmann::json::object(), dir / "p.png", dir / "p.json");
  Image pixels = read_image(dir / "p.png");
  pixels.at(3, 3, 0) = pixels.at(3, 3, 0) > 0.5 ? 0.0 : 1.0;
  write_png(dir / "p.png", pixels);
  EXPECT_THROW(load_patch(dir / "p.png", dir / "p.json"), SidecarMismatch);
}

TEST(Persistence, TamperedSidecarIsRejected) {
  const fs::path dir = scratch_dir("sidecar");
  save_patch(sample_patch(), nlohmann::json::object(), dir / "p.png", dir / "p.json");
  const auto bytes = read_file(dir / "p.json");
  nlohmann::json sidecar = nlohmann::json::parse(bytes.begin(), bytes.end());
  sidecar["natural_hash"] = "0000000000000000";
  atomic_write(dir / "p.json", sidecar.dump());
  EXPECT_THROW(load_patch(dir / "p.png", dir / "p.json"), SidecarMismatch);
  sidecar.erase("natural_hash");
  atomic_write(dir / "p.json", sidecar.dump());
  EXPECT_THROW(load_patch(dir / "p.png", dir / "p.json"), SidecarMismatch);
  atomic_write(dir / "p.json", std::string("{ not json"));
  EXPECT_THROW(load_patch(dir / "p.png", dir / "p.json"), UnreadableFile);
  EXPECT_THROW(load_patch(dir / "none.png", dir / "p.json"), UnreadableFile);
}

#include "depthpatch/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>

#include <jpeglib.h>

#include "depthpatch/errors.hpp"

namespace depthpatch {

namespace fs = std::filesystem;

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw UnreadableFile("cannot read " + path.string());
  return bytes;
}

void atomic_write(const fs::path& path, const std::vector<unsigned char>& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UnreadableFile("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw UnreadableFile("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw UnreadableFile("cannot rename onto " + path.string());
  }
}

void atomic_write(const fs::path& path, const std::string& text) {
  atomic_write(path, std::vector<unsigned char>(text.begin(), text.end()));
}

std::vector<unsigned char> quantize8(const Image& image) {
  std::vector<unsigned char> out(image.numel());
  const auto v = image.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<unsigned char>(std::lround(std::clamp(v[i], 0.0, 1.0) * 255.0));
  }
  return out;
}

Image dequantize8(const std::vector<unsigned char>& bytes, int height, int width, int channels) {
  Image image(height, width, channels);
  if (bytes.size() != image.numel()) throw DimensionMismatch("byte count does not match shape");
  auto v = image.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = bytes[i] / 255.0;
  return image;
}

namespace {

struct PngWriteBuffer {
  std::vector<unsigned char>* out;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* buffer = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
  buffer->out->insert(buffer->out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngReadBuffer {
  const std::vector<unsigned char>* in;
  std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* buffer = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
  if (buffer->offset + length > buffer->in->size()) png_error(png, "truncated PNG");
  std::memcpy(data, buffer->in->data() + buffer->offset, length);
  buffer->offset += length;
}

struct DecodedPng {
  int height = 0, width = 0, channels = 0, bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

// Decodes to 8- or 16-bit samples with palette expanded and alpha dropped.
DecodedPng decode_png_samples(const std::vector<unsigned char>& bytes, bool keep_gray) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw UnreadableFile("not a PNG");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw UnreadableFile("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  DecodedPng out;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> raw;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw UnreadableFile("corrupt PNG");
  }
  PngReadBuffer buffer{&bytes, 0};
  png_set_read_fn(png, &buffer, png_read_from_vector);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (!keep_gray && (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)) {
    png_set_gray_to_rgb(png);
  }
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int r = 0; r < out.height; ++r) rows[r] = raw.data() + rowbytes * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.height) * out.width * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = raw[i];
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr) {}

}  // namespace

std::vector<unsigned char> encode_png(const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw InvalidArgument("PNG encoding supports 1 or 3 channels");
  }
  const std::vector<unsigned char> bytes = quantize8(image);
  std::vector<unsigned char> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw CodecError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(image.height());
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw CodecError("PNG encoding failed");
  }
  PngWriteBuffer buffer{&out};
  png_set_write_fn(png, &buffer, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, image.width(), image.height(), 8,
               image.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
  for (int r = 0; r < image.height(); ++r) {
    rows[r] = const_cast<png_bytep>(bytes.data() + stride * r);
  }
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Image decode_png(const std::vector<unsigned char>& bytes) {
  const DecodedPng png = decode_png_samples(bytes, false);
  Image image(png.height, png.width, png.channels);
  const double scale = png.bit_depth == 16 ? 65535.0 : 255.0;
  auto v = image.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = png.samples[i] / scale;
  return image;
}

Image decode_jpeg(const std::vector<unsigned char>& bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_silent;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw UnreadableFile(std::string("corrupt JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int w = static_cast<int>(cinfo.output_width), h = static_cast<int>(cinfo.output_height);
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = raw.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return dequantize8(raw, h, w, 3);
}

Image read_image(const fs::path& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(bytes);
  }
  throw UnreadableFile("unsupported image format: " + path.string());
}

DepthMap read_depth_png(const fs::path& path, double scale) {
  const DecodedPng png = decode_png_samples(read_file(path), true);
  DepthMap depth(png.height, png.width, 0.0, scale == 1.0 ? "raw" : "scaled");
  auto d = depth.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = png.samples[i * png.channels] * scale;
  }
  return depth;
}

void write_png(const fs::path& path, const Image& image) { atomic_write(path, encode_png(image)); }

std::vector<unsigned char> encode_jpeg(const Image& image, int quality) {
  if (image.channels() != 3) throw InvalidArgument("JPEG encoding needs 3 channels");
  if (quality < 1 || quality > 100) throw InvalidArgument("JPEG quality must be in 1..100");
  const std::vector<unsigned char> bytes = quantize8(image);
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_silent;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw CodecError(std::string("JPEG encoding failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width());
  cinfo.image_height = static_cast<JDIMENSION>(image.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(bytes.data() + stride * cinfo.next_scanline);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<unsigned char> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

}  // namespace depthpatch

#include "mhi/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <numeric>

namespace mhi {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

namespace {

int color_type_for(int channels) {
  switch (channels) {
    case 1: return PNG_COLOR_TYPE_GRAY;
    case 2: return PNG_COLOR_TYPE_GRAY_ALPHA;
    case 3: return PNG_COLOR_TYPE_RGB;
    case 4: return PNG_COLOR_TYPE_RGBA;
    default: throw FormatError("unsupported channel count for PNG");
  }
}

std::vector<std::uint8_t> quantize_rows(int width, int height, int channels,
                                        std::span<const float> data, int bit_depth) {
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (data.size() != n) throw DimensionMismatch("image buffer does not match its dimensions");
  const int bytes = bit_depth / 8;
  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<std::uint8_t> out(n * bytes);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::clamp(static_cast<double>(data[i]), 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(v * scale));
    if (bytes == 1) {
      out[i] = static_cast<std::uint8_t>(q);
    } else {
      out[2 * i] = static_cast<std::uint8_t>(q >> 8);
      out[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
    }
  }
  return out;
}

void png_to_vector(png_structp png, png_bytep bytes, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), bytes, bytes + len);
}

void png_flush_noop(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(int width, int height, int channels,
                                     std::span<const float> data, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw FormatError("PNG bit depth must be 8 or 16");
  const int color_type = color_type_for(channels);
  const auto raw = quantize_rows(width, height, channels, data, bit_depth);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("libpng initialization failed");
  }
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_to_vector, png_flush_noop);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(raw.data() + y * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const std::filesystem::path& path, int width, int height, int channels,
               std::span<const float> data, int bit_depth) {
  const auto bytes = encode_png(width, height, channels, data, bit_depth);
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw FormatError("cannot open " + path.string() + " for writing");
  if (std::fwrite(bytes.data(), 1, bytes.size(), fp.get()) != bytes.size())
    throw FormatError("short write to " + path.string());
}

PngImage read_png(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw FormatError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw FormatError(path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng initialization failed");
  }
  PngImage img;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth < 8) bit_depth = 8;
  if (bit_depth == 16) png_set_swap(png);  // host little-endian u16
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  img.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raw.resize(stride * img.height);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.data.resize(n);
  if (img.bit_depth == 16) {
    const auto* p = reinterpret_cast<const std::uint16_t*>(raw.data());
    for (std::size_t i = 0; i < n; ++i) img.data[i] = static_cast<float>(p[i] / 65535.0);
  } else {
    for (std::size_t i = 0; i < n; ++i) img.data[i] = static_cast<float>(raw[i] / 255.0);
  }
  return img;
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  const PngImage png = read_png(path);
  RgbImage out(png.width, png.height);
  auto dst = out.data();
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      const int src_c = png.channels >= 3 ? c : 0;
      dst[3 * p + c] = png.data[p * png.channels + src_c];
    }
  }
  return out;
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  std::vector<float> v(mask.data().size());
  std::transform(mask.data().begin(), mask.data().end(), v.begin(),
                 [](std::uint8_t b) { return b ? 1.0f : 0.0f; });
  write_png(path, mask.width(), mask.height(), 1, v, 8);
}

Mask read_mask_png(const std::filesystem::path& path) {
  const PngImage png = read_png(path);
  Mask m(png.width, png.height);
  for (int y = 0; y < png.height; ++y)
    for (int x = 0; x < png.width; ++x)
      m.set(x, y, png.data[(static_cast<std::size_t>(y) * png.width + x) * png.channels] >= 0.5f);
  return m;
}

}  // namespace mhi

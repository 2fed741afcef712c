#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mhi/errors.hpp"

namespace mhi {

/// Interleaved image with a compile-time channel count. Values are linear in
/// [0, 1] unless stated otherwise.
template <int Channels, typename T = float>
class Image {
 public:
  static constexpr int kChannels = Channels;

  Image() = default;
  Image(int width, int height, T fill = T(0))
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height * Channels, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  T* pixel(int x, int y) { return data_.data() + index(x, y); }
  const T* pixel(int x, int y) const { return data_.data() + index(x, y); }
  T& at(int x, int y, int c = 0) { return data_[index(x, y) + c]; }
  T at(int x, int y, int c = 0) const { return data_[index(x, y) + c]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_size(int w, int h) const { return width_ == w && height_ == h; }
  template <int C, typename U>
  bool same_size(const Image<C, U>& other) const {
    return same_size(other.width(), other.height());
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Image<1>;
using RgbImage = Image<3>;
using RgbaImage = Image<4>;
using DepthImage = Image<1, double>;

/// Per-pixel boolean map.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Decoded PNG, any of gray/gray+alpha/RGB/RGBA at 8 or 16 bits.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<float> data;  // interleaved, value / (2^bit_depth - 1)
};

PngImage read_png(const std::filesystem::path& path);

/// Writes interleaved [0,1] data quantized with round-to-nearest.
void write_png(const std::filesystem::path& path, int width, int height, int channels,
               std::span<const float> data, int bit_depth = 8);

/// PNG encoded in memory (same bytes as write_png would produce).
std::vector<std::uint8_t> encode_png(int width, int height, int channels,
                                     std::span<const float> data, int bit_depth = 8);

template <int C>
void write_png(const std::filesystem::path& path, const Image<C>& img, int bit_depth = 8) {
  write_png(path, img.width(), img.height(), C, img.data(), bit_depth);
}

template <int C>
std::vector<std::uint8_t> encode_png(const Image<C>& img, int bit_depth = 8) {
  return encode_png(img.width(), img.height(), C, img.data(), bit_depth);
}

/// Loads a PNG and converts to RGB (gray is replicated, alpha dropped).
RgbImage read_rgb_png(const std::filesystem::path& path);

void write_mask_png(const std::filesystem::path& path, const Mask& mask);
Mask read_mask_png(const std::filesystem::path& path);

}  // namespace mhi

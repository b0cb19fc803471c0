#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace labelset {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit interleaved RGB image, row-major.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  Rgb at(int x, int y) const noexcept {
    const std::size_t i = offset(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const std::size_t i = offset(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }

  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);

  std::span<const std::uint8_t> bytes() const noexcept { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Decodes a PNG or JPEG file; the format is sniffed from the file signature.
Raster load_image(const std::filesystem::path& path);

/// Encodes with fixed zlib settings so identical rasters give identical bytes.
std::vector<std::uint8_t> encode_png(const Raster& image);
void save_png(const Raster& image, const std::filesystem::path& path);

/// Scales into a side x side square, preserving aspect ratio; the unused
/// border is black.
Raster resize_letterbox(const Raster& image, int side);

}  // namespace labelset

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hy3d {

/// 8-bit RGB image, row-major, 3 bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}

  std::uint8_t* px(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* px(int x, int y) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  bool operator==(const Image& o) const {
    return width == o.width && height == o.height && rgb == o.rgb;
  }
};

/// Binary mask, 0 = off, 1 = on.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> on;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), on(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return on[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return on[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;
};

/// Multi-channel double-precision field (latents, noise predictions).
/// Layout: ((y * width) + x) * channels + c.
struct Field {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> v;

  Field() = default;
  Field(int w, int h, int c)
      : width(w), height(h), channels(c), v(static_cast<std::size_t>(w) * h * c, 0.0) {}

  double& at(int x, int y, int c) {
    return v[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c) const {
    return v[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const Field& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);
void write_mask_png(const std::string& path, const Mask& mask);
Mask read_mask_png(const std::string& path);

}  // namespace hy3d

#include "hy3d/image.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace hy3d {

std::size_t Mask::count() const {
  return std::accumulate(on.begin(), on.end(), std::size_t{0},
                         [](std::size_t a, std::uint8_t b) { return a + (b ? 1 : 0); });
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png_impl(const std::string& path, int width, int height, int color_type,
                    const std::uint8_t* data, std::size_t row_bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng write failure: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + y * row_bytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
  write_png_impl(path, img.width, img.height, PNG_COLOR_TYPE_RGB, img.rgb.data(),
                 static_cast<std::size_t>(img.width) * 3);
}

void write_mask_png(const std::string& path, const Mask& mask) {
  std::vector<std::uint8_t> gray(mask.on.size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.on[i] ? 255 : 0;
  write_png_impl(path, mask.width, mask.height, PNG_COLOR_TYPE_GRAY, gray.data(),
                 static_cast<std::size_t>(mask.width));
}

namespace {

// Reads any PNG as 8-bit RGB.
Image read_png_rgb(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open for reading: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng read failure: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  Image img(static_cast<int>(png_get_image_width(png, info)),
            static_cast<int>(png_get_image_height(png, info)));
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.px(0, y);
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace

Image read_png(const std::string& path) { return read_png_rgb(path); }

Mask read_mask_png(const std::string& path) {
  Image img = read_png_rgb(path);
  Mask m(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) m.at(x, y) = img.px(x, y)[0] >= 128 ? 1 : 0;
  return m;
}

}  // namespace hy3d

#include "hy3d/mvgrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace hy3d {

ViewGrid assemble(const ViewSet& views) {
  int tile = views.images[0].width;
  for (const Image& img : views.images) {
    if (img.width != tile || img.height != tile)
      throw std::invalid_argument("assemble: views must share one square resolution");
  }
  ViewGrid grid;
  grid.tile = tile;
  grid.pixels = Image(ViewGrid::kCols * tile, ViewGrid::kRows * tile);
  for (int slot = 0; slot < 6; ++slot) {
    int row = slot / ViewGrid::kCols, col = slot % ViewGrid::kCols;
    const Image& src = views.images[slot];
    for (int y = 0; y < tile; ++y) {
      std::memcpy(grid.pixels.px(col * tile, row * tile + y), src.px(0, y),
                  static_cast<std::size_t>(tile) * 3);
    }
  }
  return grid;
}

ViewSet split(const ViewGrid& grid) {
  const Image& px = grid.pixels;
  if (px.height % ViewGrid::kRows != 0 || px.width % ViewGrid::kCols != 0)
    throw std::invalid_argument("split: grid dimensions not divisible by 3x2 layout");
  int tile = px.height / ViewGrid::kRows;
  if (px.width / ViewGrid::kCols != tile)
    throw std::invalid_argument("split: grid tiles are not square");
  if (grid.tile != 0 && grid.tile != tile)
    throw std::invalid_argument("split: declared tile size disagrees with pixels");
  ViewSet views;
  for (int slot = 0; slot < 6; ++slot) {
    int row = slot / ViewGrid::kCols, col = slot % ViewGrid::kCols;
    Image img(tile, tile);
    for (int y = 0; y < tile; ++y) {
      std::memcpy(img.px(0, y), px.px(col * tile, row * tile + y),
                  static_cast<std::size_t>(tile) * 3);
    }
    views.images[slot] = std::move(img);
  }
  views.poses = orbit_poses();
  return views;
}

double tile_azimuth(int slot) { return 60.0 * slot; }

Image resize_image(const Image& img, int target_width, int target_height) {
  if (target_width <= 0 || target_height <= 0)
    throw std::invalid_argument("resize_image: target must be positive");
  if (target_width == img.width && target_height == img.height) return img;

  Image out(target_width, target_height);
  double sx = static_cast<double>(img.width) / target_width;
  double sy = static_cast<double>(img.height) / target_height;
  for (int y = 0; y < target_height; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, img.height - 1);
    int y1c = std::clamp(y0 + 1, 0, img.height - 1);
    for (int x = 0; x < target_width; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, img.width - 1);
      int x1c = std::clamp(x0 + 1, 0, img.width - 1);
      const std::uint8_t* p00 = img.px(x0c, y0c);
      const std::uint8_t* p10 = img.px(x1c, y0c);
      const std::uint8_t* p01 = img.px(x0c, y1c);
      const std::uint8_t* p11 = img.px(x1c, y1c);
      std::uint8_t* dst = out.px(x, y);
      for (int c = 0; c < 3; ++c) {
        double v = (1 - wy) * ((1 - wx) * p00[c] + wx * p10[c]) +
                   wy * ((1 - wx) * p01[c] + wx * p11[c]);
        dst[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

}  // namespace hy3d

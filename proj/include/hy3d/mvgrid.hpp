#pragma once

#include <array>

#include "hy3d/camera.hpp"
#include "hy3d/image.hpp"

namespace hy3d {

/// Six square views with their orbit poses, ascending azimuth.
struct ViewSet {
  std::array<Image, 6> images;
  std::array<CameraPose, 6> poses = orbit_poses();
};

/// 3x2 tiled grid image. Tile order is row-major ascending azimuth:
/// row 0: 0/60, row 1: 120/180, row 2: 240/300.
struct ViewGrid {
  static constexpr int kRows = 3;
  static constexpr int kCols = 2;
  int tile = 0;  // pixels per tile side
  Image pixels;
};

ViewGrid assemble(const ViewSet& views);
ViewSet split(const ViewGrid& grid);

/// Maps a tile slot (row-major index 0..5) to the azimuth of the view it holds.
double tile_azimuth(int slot);

/// Bilinear resampling with edge clamping; same-size resize is the identity.
Image resize_image(const Image& img, int target_width, int target_height);

}  // namespace hy3d

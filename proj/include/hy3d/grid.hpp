#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace hy3d {

/// Dense scalar field sampled at the nodes of a regular grid over an
/// axis-aligned box (default [-1,1]^3). Node i runs from min to max inclusive,
/// spacing extent / (res - 1). Layout: ((iz * ny) + iy) * nx + ix.
struct SdfGrid {
  std::array<int, 3> res{0, 0, 0};
  Eigen::Vector3d bounds_min = Eigen::Vector3d(-1, -1, -1);
  Eigen::Vector3d bounds_max = Eigen::Vector3d(1, 1, 1);
  std::vector<double> values;

  SdfGrid() = default;
  SdfGrid(int nx, int ny, int nz);
  explicit SdfGrid(int n) : SdfGrid(n, n, n) {}

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(iz) * res[1] + iy) * res[0] + ix;
  }
  double& at(int ix, int iy, int iz) { return values[index(ix, iy, iz)]; }
  double at(int ix, int iy, int iz) const { return values[index(ix, iy, iz)]; }

  Eigen::Vector3d point(int ix, int iy, int iz) const;
  Eigen::Vector3d spacing() const;
  bool all_finite() const;
};

/// Binary dump: "SDFG" magic, u32 dims, f32 bounds, f32 values, little-endian.
void save_grid(const std::string& path, const SdfGrid& grid);
SdfGrid load_grid(const std::string& path);

}  // namespace hy3d

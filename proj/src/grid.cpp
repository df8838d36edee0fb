#include "hy3d/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hy3d {

SdfGrid::SdfGrid(int nx, int ny, int nz) {
  if (nx < 2 || ny < 2 || nz < 2) throw std::invalid_argument("SdfGrid: resolution must be >= 2");
  res = {nx, ny, nz};
  values.assign(static_cast<std::size_t>(nx) * ny * nz, 0.0);
}

Eigen::Vector3d SdfGrid::point(int ix, int iy, int iz) const {
  Eigen::Vector3d ext = bounds_max - bounds_min;
  return bounds_min + Eigen::Vector3d(ext.x() * ix / (res[0] - 1), ext.y() * iy / (res[1] - 1),
                                      ext.z() * iz / (res[2] - 1));
}

Eigen::Vector3d SdfGrid::spacing() const {
  Eigen::Vector3d ext = bounds_max - bounds_min;
  return {ext.x() / (res[0] - 1), ext.y() / (res[1] - 1), ext.z() / (res[2] - 1)};
}

bool SdfGrid::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(os, u);
}

float get_f32(std::istream& is) {
  std::uint32_t u = get_u32(is);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

}  // namespace

void save_grid(const std::string& path, const SdfGrid& grid) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_grid: cannot open " + path);
  os.write("SDFG", 4);
  for (int i = 0; i < 3; ++i) put_u32(os, static_cast<std::uint32_t>(grid.res[i]));
  for (int i = 0; i < 3; ++i) put_f32(os, static_cast<float>(grid.bounds_min[i]));
  for (int i = 0; i < 3; ++i) put_f32(os, static_cast<float>(grid.bounds_max[i]));
  for (double v : grid.values) put_f32(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("save_grid: write failed: " + path);
}

SdfGrid load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_grid: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "SDFG", 4) != 0) throw std::runtime_error("load_grid: bad magic");
  int nx = static_cast<int>(get_u32(is));
  int ny = static_cast<int>(get_u32(is));
  int nz = static_cast<int>(get_u32(is));
  SdfGrid grid(nx, ny, nz);
  for (int i = 0; i < 3; ++i) grid.bounds_min[i] = get_f32(is);
  for (int i = 0; i < 3; ++i) grid.bounds_max[i] = get_f32(is);
  for (double& v : grid.values) v = get_f32(is);
  if (!is) throw std::runtime_error("load_grid: truncated file: " + path);
  return grid;
}

}  // namespace hy3d

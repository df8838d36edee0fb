#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "hy3d/grid.hpp"
#include "hy3d/rng.hpp"

namespace hy3d {

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  bool empty() const { return faces.empty(); }
  double triangle_area(int face) const;
  double total_area() const;
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;

  std::size_t size() const { return points.size(); }
};

/// Standard 256-configuration lookup with linear edge interpolation; values
/// <= iso count as inside. Vertices land in the world coordinates of the grid
/// bounds and are welded along shared cell edges. All-positive or all-negative
/// grids yield an empty mesh.
Mesh marching_cubes(const SdfGrid& grid, double iso = 0.0);

/// Drops triangles with area below the threshold.
Mesh drop_degenerate_triangles(const Mesh& mesh, double min_area = 1e-12);

struct WatertightReport {
  bool watertight = false;
  int boundary_edges = 0;      // edges used by exactly one triangle
  int non_manifold_edges = 0;  // edges used by three or more
  int components = 0;
};

/// True iff every undirected edge is shared by exactly two triangles.
WatertightReport is_watertight(const Mesh& mesh);

struct NormalizeResult {
  Mesh mesh;
  double scale = 1.0;              // applied multiplier
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // subtracted centroid
};

/// Translates the vertex centroid to the origin and scales so the farthest
/// vertex sits at radius 1.
NormalizeResult normalize_to_unit_sphere(const Mesh& mesh);

/// Area-weighted triangle choice with uniform barycentric samples.
PointCloud sample_surface(const Mesh& mesh, int n, Rng& rng);

void save_obj(const std::string& path, const Mesh& mesh);
Mesh load_obj(const std::string& path);

}  // namespace hy3d

#include "hy3d/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "hy3d/mc_tables.hpp"

namespace hy3d {

double Mesh::triangle_area(int face) const {
  const auto& f = faces[face];
  Eigen::Vector3d a = vertices[f[1]] - vertices[f[0]];
  Eigen::Vector3d b = vertices[f[2]] - vertices[f[0]];
  return 0.5 * a.cross(b).norm();
}

double Mesh::total_area() const {
  double s = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) s += triangle_area(static_cast<int>(i));
  return s;
}

namespace {

// Cube corner offsets in Bourke numbering.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// Edge -> (corner, corner).
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Unique key for a grid edge: anchor node plus axis (0=x, 1=y, 2=z).
std::uint64_t edge_key(int ix, int iy, int iz, int axis) {
  return ((static_cast<std::uint64_t>(ix) & 0xFFFFF) << 44) |
         ((static_cast<std::uint64_t>(iy) & 0xFFFFF) << 24) |
         ((static_cast<std::uint64_t>(iz) & 0xFFFFF) << 4) | static_cast<std::uint64_t>(axis);
}

}  // namespace

Mesh marching_cubes(const SdfGrid& grid, double iso) {
  if (!grid.all_finite()) throw std::invalid_argument("marching_cubes: non-finite grid");
  Mesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertices;

  const int nx = grid.res[0], ny = grid.res[1], nz = grid.res[2];
  for (int iz = 0; iz + 1 < nz; ++iz) {
    for (int iy = 0; iy + 1 < ny; ++iy) {
      for (int ix = 0; ix + 1 < nx; ++ix) {
        double value[8];
        int cube_index = 0;
        for (int c = 0; c < 8; ++c) {
          value[c] = grid.at(ix + kCorner[c][0], iy + kCorner[c][1], iz + kCorner[c][2]);
          if (value[c] <= iso) cube_index |= 1 << c;  // tie counts as inside
        }
        int edges = kMcEdgeTable[cube_index];
        if (edges == 0) continue;

        int edge_vertex_index[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          int c0 = kEdge[e][0], c1 = kEdge[e][1];
          int a0[3] = {ix + kCorner[c0][0], iy + kCorner[c0][1], iz + kCorner[c0][2]};
          int a1[3] = {ix + kCorner[c1][0], iy + kCorner[c1][1], iz + kCorner[c1][2]};
          int axis = a0[0] != a1[0] ? 0 : (a0[1] != a1[1] ? 1 : 2);
          // Anchor at the lower node along the axis.
          int anchor[3] = {std::min(a0[0], a1[0]), std::min(a0[1], a1[1]),
                           std::min(a0[2], a1[2])};
          std::uint64_t key = edge_key(anchor[0], anchor[1], anchor[2], axis);
          auto it = edge_vertices.find(key);
          if (it == edge_vertices.end()) {
            double v0 = value[c0], v1 = value[c1];
            double t = std::abs(v1 - v0) < 1e-300 ? 0.5 : (iso - v0) / (v1 - v0);
            Eigen::Vector3d p0 = grid.point(a0[0], a0[1], a0[2]);
            Eigen::Vector3d p1 = grid.point(a1[0], a1[1], a1[2]);
            mesh.vertices.push_back(p0 + t * (p1 - p0));
            it = edge_vertices.emplace(key, static_cast<int>(mesh.vertices.size()) - 1).first;
          }
          edge_vertex_index[e] = it->second;
        }

        const int* tri = kMcTriTable[cube_index];
        for (int k = 0; tri[k] != -1; k += 3) {
          mesh.faces.push_back(
              {edge_vertex_index[tri[k]], edge_vertex_index[tri[k + 1]], edge_vertex_index[tri[k + 2]]});
        }
      }
    }
  }
  return drop_degenerate_triangles(mesh);
}

Mesh drop_degenerate_triangles(const Mesh& mesh, double min_area) {
  Mesh out;
  out.vertices = mesh.vertices;
  out.faces.reserve(mesh.faces.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i)
    if (mesh.triangle_area(static_cast<int>(i)) >= min_area) out.faces.push_back(mesh.faces[i]);
  return out;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

WatertightReport is_watertight(const Mesh& mesh) {
  WatertightReport report;
  std::unordered_map<std::uint64_t, int> edge_count;
  std::vector<bool> used(mesh.vertices.size(), false);
  UnionFind uf(static_cast<int>(mesh.vertices.size()));

  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      used[a] = used[b] = true;
      uf.unite(a, b);
      std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                          static_cast<std::uint64_t>(std::max(a, b));
      ++edge_count[key];
    }
  }
  for (const auto& [key, count] : edge_count) {
    if (count == 1) ++report.boundary_edges;
    if (count >= 3) ++report.non_manifold_edges;
  }
  std::vector<int> roots;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    if (used[i]) roots.push_back(uf.find(static_cast<int>(i)));
  std::sort(roots.begin(), roots.end());
  report.components = static_cast<int>(std::unique(roots.begin(), roots.end()) - roots.begin());
  report.watertight =
      !mesh.faces.empty() && report.boundary_edges == 0 && report.non_manifold_edges == 0;
  return report;
}

NormalizeResult normalize_to_unit_sphere(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw std::invalid_argument("normalize_to_unit_sphere: empty mesh");
  NormalizeResult result;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : mesh.vertices) centroid += v;
  centroid /= static_cast<double>(mesh.vertices.size());

  double max_radius = 0;
  for (const auto& v : mesh.vertices) max_radius = std::max(max_radius, (v - centroid).norm());
  if (max_radius <= 0) throw std::invalid_argument("normalize_to_unit_sphere: degenerate mesh");

  result.center = centroid;
  result.scale = 1.0 / max_radius;
  result.mesh.faces = mesh.faces;
  result.mesh.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) result.mesh.vertices.push_back((v - centroid) * result.scale);
  return result;
}

PointCloud sample_surface(const Mesh& mesh, int n, Rng& rng) {
  if (mesh.empty()) throw std::invalid_argument("sample_surface: empty mesh");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    total += mesh.triangle_area(static_cast<int>(i));
    cumulative[i] = total;
  }
  if (total <= 0) throw std::invalid_argument("sample_surface: zero total area");

  PointCloud cloud;
  cloud.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    double pick = uniform(rng, 0.0, total);
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    std::size_t face = std::min(static_cast<std::size_t>(it - cumulative.begin()),
                                mesh.faces.size() - 1);
    double u = uniform(rng, 0.0, 1.0), v = uniform(rng, 0.0, 1.0);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const auto& f = mesh.faces[face];
    cloud.points.push_back(mesh.vertices[f[0]] + u * (mesh.vertices[f[1]] - mesh.vertices[f[0]]) +
                           v * (mesh.vertices[f[2]] - mesh.vertices[f[0]]));
  }
  return cloud;
}

void save_obj(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_obj: cannot open " + path);
  os.precision(17);
  for (const auto& v : mesh.vertices) os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& f : mesh.faces)
    os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  if (!os) throw std::runtime_error("save_obj: write failed: " + path);
}

Mesh load_obj(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_obj: cannot open " + path);
  Mesh mesh;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Eigen::Vector3d v;
      ls >> v.x() >> v.y() >> v.z();
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int i = 0; i < 3; ++i) {
        std::string tok;
        ls >> tok;
        f[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;  // 1-based, slashes tolerated
        if (f[i] < 0) throw std::runtime_error("load_obj: bad face index");
      }
      mesh.faces.push_back(f);
    }
  }
  for (const auto& f : mesh.faces)
    for (int i : f)
      if (i >= static_cast<int>(mesh.vertices.size()))
        throw std::runtime_error("load_obj: face index out of range");
  return mesh;
}

}  // namespace hy3d

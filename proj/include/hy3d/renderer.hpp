#pragma once

#include <optional>
#include <vector>

#include "hy3d/camera.hpp"
#include "hy3d/image.hpp"
#include "hy3d/mvgrid.hpp"
#include "hy3d/sdf.hpp"

namespace hy3d {

struct RayHit {
  Eigen::Vector3d point;
  double distance = 0.0;
};

struct RenderedView {
  Image image;
  Mask silhouette;
  CameraPose pose;
  std::vector<double> depth;  // hit distance per pixel, +inf where the ray escaped
};

struct RenderOptions {
  int max_steps = 256;
  double eps = 1e-4;
  double bound_radius = 1.2;  // fixtures live inside the unit sphere
  Eigen::Vector3d light_dir = Eigen::Vector3d(-0.4, -0.6, -1.0).normalized();
  double ambient = 0.2;
};

/// Sphere tracing from the ray origin; returns the first surface crossing
/// within eps, or nothing if the ray escapes the bounding sphere.
std::optional<RayHit> ray_march(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                const Sdf& shape, const RenderOptions& opts = {});

/// Lambertian shading with SDF-gradient normals on a white background.
RenderedView render(const Sdf& shape, const CameraPose& pose, int resolution,
                    const RenderOptions& opts = {});

struct FixtureSet {
  ViewSet views;
  std::array<Mask, 6> silhouettes;
  std::array<std::vector<double>, 6> depths;
  std::optional<RenderedView> condition;
};

/// Renders the six orbit views plus, optionally, one condition view sampled
/// from the condition-pose distribution.
FixtureSet render_fixture_set(const Sdf& shape, int resolution, bool include_condition,
                              Rng& rng, const RenderOptions& opts = {});

}  // namespace hy3d

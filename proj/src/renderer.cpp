#include "hy3d/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hy3d {

namespace {

// Entry/exit parameters of a ray against the bounding sphere; false on miss.
bool clip_to_sphere(const Eigen::Vector3d& o, const Eigen::Vector3d& d, double radius,
                    double* t_in, double* t_out) {
  double b = o.dot(d);
  double c = o.squaredNorm() - radius * radius;
  double disc = b * b - c;
  if (disc < 0) return false;
  double s = std::sqrt(disc);
  *t_in = std::max(0.0, -b - s);
  *t_out = -b + s;
  return *t_out > 0;
}

}  // namespace

std::optional<RayHit> ray_march(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                const Sdf& shape, const RenderOptions& opts) {
  double t, t_exit;
  if (!clip_to_sphere(origin, dir, opts.bound_radius, &t, &t_exit)) return std::nullopt;
  for (int step = 0; step < opts.max_steps; ++step) {
    Eigen::Vector3d p = origin + t * dir;
    double d = shape.eval(p);
    if (std::abs(d) < opts.eps) return RayHit{p, t};
    t += std::max(d, opts.eps * 0.5);
    if (t > t_exit) return std::nullopt;
  }
  return std::nullopt;
}

RenderedView render(const Sdf& shape, const CameraPose& pose, int resolution,
                    const RenderOptions& opts) {
  CameraMatrices m = pose_to_matrices(pose, resolution, resolution);
  RayBundle rays = generate_rays(m);

  RenderedView view;
  view.pose = pose;
  view.image = Image(resolution, resolution);
  view.silhouette = Mask(resolution, resolution);
  view.depth.assign(static_cast<std::size_t>(resolution) * resolution,
                    std::numeric_limits<double>::infinity());

  const Eigen::Vector3d to_light = -opts.light_dir;
  const Eigen::Vector3d albedo(0.72, 0.72, 0.76);
  for (int y = 0; y < resolution; ++y) {
    for (int x = 0; x < resolution; ++x) {
      auto hit = ray_march(rays.origin, rays.dir(x, y), shape, opts);
      if (!hit) continue;  // background stays pure white
      Eigen::Vector3d n = sdf_gradient(shape, hit->point);
      double nn = n.norm();
      if (nn > 0) n /= nn;
      double lambert = std::max(0.0, n.dot(to_light));
      double shade = std::clamp(opts.ambient + (1.0 - opts.ambient) * lambert, 0.0, 1.0);
      std::uint8_t* px = view.image.px(x, y);
      for (int c = 0; c < 3; ++c)
        px[c] = static_cast<std::uint8_t>(std::lround(std::clamp(albedo[c] * shade, 0.0, 1.0) * 255));
      view.silhouette.at(x, y) = 1;
      view.depth[static_cast<std::size_t>(y) * resolution + x] = hit->distance;
    }
  }
  return view;
}

FixtureSet render_fixture_set(const Sdf& shape, int resolution, bool include_condition,
                              Rng& rng, const RenderOptions& opts) {
  FixtureSet set;
  auto poses = orbit_poses();
  for (int i = 0; i < 6; ++i) {
    RenderedView v = render(shape, poses[i], resolution, opts);
    set.views.images[i] = std::move(v.image);
    set.silhouettes[i] = std::move(v.silhouette);
    set.depths[i] = std::move(v.depth);
  }
  set.views.poses = poses;
  if (include_condition) {
    CameraPose cond = sample_condition_pose(rng);
    set.condition = render(shape, cond, resolution, opts);
  }
  return set;
}

}  // namespace hy3d

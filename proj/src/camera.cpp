#include "hy3d/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace hy3d {

namespace {
constexpr double kPi = 3.14159265358979323846;
double deg2rad(double d) { return d * kPi / 180.0; }

double normalize_azimuth(double a) {
  double r = std::fmod(a, 360.0);
  if (r < 0) r += 360.0;
  return r;
}
}  // namespace

CameraPose::CameraPose(double elev, double azim, double dist, double fov)
    : elevation_deg(elev), azimuth_deg(normalize_azimuth(azim)), distance(dist), fov_deg(fov) {
  if (!(distance > 0)) throw std::invalid_argument("CameraPose: distance must be positive");
  if (!(fov_deg > 0 && fov_deg < 180)) throw std::invalid_argument("CameraPose: fov out of (0,180)");
}

Eigen::Vector3d CameraPose::position() const {
  double e = deg2rad(elevation_deg), a = deg2rad(azimuth_deg);
  return distance * Eigen::Vector3d(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
}

bool CameraMatrices::project(const Eigen::Vector3d& world, Eigen::Vector2d* pixel) const {
  Eigen::Vector3d cam = rotation() * world + translation();
  if (cam.z() <= 0) return false;
  Eigen::Vector3d h = intrinsic * cam;
  *pixel = Eigen::Vector2d(h.x() / h.z(), h.y() / h.z());
  return true;
}

bool CameraEmbedding::is_zero() const {
  for (double v : values)
    if (v != 0.0) return false;
  return true;
}

double CameraEmbedding::norm() const {
  double s = 0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

std::array<CameraPose, 6> orbit_poses() {
  std::array<CameraPose, 6> poses;
  for (int i = 0; i < 6; ++i) poses[i] = CameraPose(0.0, 60.0 * i, 1.5, 47.9);
  return poses;
}

CameraPose sample_condition_pose(Rng& rng) {
  double elev = uniform(rng, -20.0, 60.0);
  double azim = uniform(rng, 0.0, 360.0);
  double fov = uniform(rng, 47.0 - 0.01, 47.0 + 0.01);
  double dist = uniform(rng, 1.5 - 0.1, 1.5 + 0.1);
  return CameraPose(elev, azim, dist, fov);
}

CameraMatrices pose_to_matrices(const CameraPose& pose, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("pose_to_matrices: resolution");
  Eigen::Vector3d eye = pose.position();
  Eigen::Vector3d fwd = (-eye).normalized();

  Eigen::Vector3d up(0, 0, 1);
  bool degenerate = std::abs(fwd.dot(up)) > 1.0 - 1e-9;
  if (degenerate) up = Eigen::Vector3d(1, 0, 0);

  Eigen::Vector3d right = fwd.cross(up).normalized();
  Eigen::Vector3d down = fwd.cross(right);  // camera y points down

  CameraMatrices m;
  m.width = width;
  m.height = height;
  m.degenerate_up = degenerate;
  Eigen::Matrix3d rot;
  rot.row(0) = right.transpose();
  rot.row(1) = down.transpose();
  rot.row(2) = fwd.transpose();
  m.extrinsic.setIdentity();
  m.extrinsic.block<3, 3>(0, 0) = rot;
  m.extrinsic.block<3, 1>(0, 3) = -rot * eye;

  double f = (height / 2.0) / std::tan(deg2rad(pose.fov_deg) / 2.0);
  m.intrinsic.setIdentity();
  m.intrinsic(0, 0) = f;
  m.intrinsic(1, 1) = f;
  m.intrinsic(0, 2) = width / 2.0;
  m.intrinsic(1, 2) = height / 2.0;
  return m;
}

CameraEmbedding camera_embedding(const std::optional<CameraPose>& pose) {
  CameraEmbedding emb;  // zero-initialized: the uncalibrated branch
  if (!pose) return emb;
  double e = deg2rad(pose->elevation_deg), a = deg2rad(pose->azimuth_deg);
  double fov = deg2rad(pose->fov_deg);
  emb.values = {std::sin(a),     std::cos(a),     std::sin(2 * a), std::cos(2 * a),
                std::sin(3 * a), std::cos(3 * a), std::sin(e),     std::cos(e),
                std::sin(2 * e), std::cos(2 * e), pose->distance,  fov,
                std::sin(fov),   std::cos(fov),   e,               1.0};
  return emb;
}

RayBundle generate_rays(const CameraMatrices& m) {
  RayBundle rays;
  rays.width = m.width;
  rays.height = m.height;
  rays.origin = m.camera_position();
  rays.directions.reserve(static_cast<std::size_t>(m.width) * m.height);
  Eigen::Matrix3d rot_t = m.rotation().transpose();
  double fx = m.intrinsic(0, 0), fy = m.intrinsic(1, 1);
  double cx = m.intrinsic(0, 2), cy = m.intrinsic(1, 2);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      Eigen::Vector3d d_cam((x + 0.5 - cx) / fx, (y + 0.5 - cy) / fy, 1.0);
      rays.directions.push_back((rot_t * d_cam).normalized());
    }
  }
  return rays;
}

}  // namespace hy3d

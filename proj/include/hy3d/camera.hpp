#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "hy3d/rng.hpp"

namespace hy3d {

// World convention: right-handed, +z up, azimuth measured in the xy-plane
// from +x. Camera frame: x right, y down, z forward (pinhole looks along +z).

struct CameraPose {
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;   // normalized to [0, 360)
  double distance = 1.5;
  double fov_deg = 47.9;      // vertical field of view

  CameraPose() = default;
  CameraPose(double elev, double azim, double dist, double fov);

  Eigen::Vector3d position() const;
};

struct CameraMatrices {
  Eigen::Matrix4d extrinsic = Eigen::Matrix4d::Identity();  // world -> camera
  Eigen::Matrix3d intrinsic = Eigen::Matrix3d::Identity();
  int width = 0;
  int height = 0;
  bool degenerate_up = false;  // look-at fell back to the +x up axis

  Eigen::Matrix3d rotation() const { return extrinsic.block<3, 3>(0, 0); }
  Eigen::Vector3d translation() const { return extrinsic.block<3, 1>(0, 3); }
  Eigen::Vector3d camera_position() const { return -rotation().transpose() * translation(); }
  Eigen::Vector3d forward() const { return rotation().row(2).transpose(); }

  /// Projects a world point to pixel coordinates (pixel centers at i + 0.5).
  /// Returns false if the point is behind the camera.
  bool project(const Eigen::Vector3d& world, Eigen::Vector2d* pixel) const;
};

struct CameraEmbedding {
  static constexpr int kSize = 16;
  std::array<double, kSize> values{};

  bool is_zero() const;
  double norm() const;
};

struct RayBundle {
  int width = 0;
  int height = 0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> directions;  // unit norm, row-major per pixel

  const Eigen::Vector3d& dir(int x, int y) const {
    return directions[static_cast<std::size_t>(y) * width + x];
  }
};

/// The six generation cameras: elevation 0, azimuths 60 degrees apart,
/// distance 1.5, fov 47.9, ascending azimuth.
std::array<CameraPose, 6> orbit_poses();

/// Condition-camera distribution: elevation U[-20,60], azimuth U[0,360),
/// fov U(47 +- 0.01), distance U(1.5 +- 0.1).
CameraPose sample_condition_pose(Rng& rng);

CameraMatrices pose_to_matrices(const CameraPose& pose, int width, int height);

/// Absent pose -> the all-zero uncalibrated embedding; present pose -> a
/// deterministic sinusoidal feature vector (never zero).
CameraEmbedding camera_embedding(const std::optional<CameraPose>& pose);

RayBundle generate_rays(const CameraMatrices& m);

}  // namespace hy3d

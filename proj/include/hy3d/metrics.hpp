#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "hy3d/rng.hpp"
#include "hy3d/surface.hpp"

namespace hy3d {

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  double rotation_angle_deg() const;
};

struct MetricsReport {
  double chamfer = 0.0;
  std::map<double, double> fscore;     // threshold -> F
  std::map<double, double> precision;
  std::map<double, double> recall;
  bool icp_applied = false;
  double icp_rotation_deg = 0.0;
  Eigen::Vector3d icp_translation = Eigen::Vector3d::Zero();

  std::string to_json() const;
  /// CSV row in table column order: chamfer, fscore@0.1, fscore@0.2, fscore@0.5.
  std::string to_csv_row() const;
};

/// Symmetric Chamfer distance:
/// 0.5 * (mean over a of min dist to b + mean over b of min dist to a).
double chamfer(const PointCloud& a, const PointCloud& b, bool brute_force = false);

struct FscoreResult {
  double fscore = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

FscoreResult fscore(const PointCloud& a, const PointCloud& b, double tau,
                    bool brute_force = false);

struct IcpResult {
  RigidTransform transform;
  PointCloud aligned;
  std::vector<double> residual_history;  // mean NN distance per iteration
};

/// Point-to-point ICP: nearest-neighbor correspondences plus closed-form
/// SVD (Kabsch) rigid fit, identity initialization after centroid pre-alignment.
IcpResult icp_align(const PointCloud& src, const PointCloud& dst, int max_iters = 50,
                    double tol = 1e-6);

struct EvaluateOptions {
  bool align = false;
  int points = 10000;
  std::uint64_t seed = 0;
  bool brute_force = false;
  std::vector<double> thresholds = {0.1, 0.2, 0.5};
};

/// Normalizes both meshes to the unit sphere, samples `points` from each,
/// optionally ICP-aligns pred onto gt, then computes CD and F-scores.
MetricsReport evaluate_pair(const Mesh& pred, const Mesh& gt, const EvaluateOptions& opts = {});

}  // namespace hy3d

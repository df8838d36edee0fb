#include "hy3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hy3d/kdtree.hpp"

namespace hy3d {

// ---- kd-tree -------------------------------------------------------------

KdTree3::KdTree3(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  nodes_.reserve(points_.size());
  if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree3::build(int begin, int end, int depth) {
  if (begin >= end) return -1;
  int axis = depth % 3;
  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  Node node;
  node.point = order_[mid];
  node.axis = axis;
  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  nodes_[self].left = build(begin, mid, depth + 1);
  nodes_[self].right = build(mid + 1, end, depth + 1);
  return self;
}

void KdTree3::search(int node, const Eigen::Vector3d& q, Result* best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  double d = (points_[n.point] - q).norm();
  if (d < best->distance) {
    best->distance = d;
    best->index = n.point;
  }
  double delta = q[n.axis] - points_[n.point][n.axis];
  int near = delta < 0 ? n.left : n.right;
  int far = delta < 0 ? n.right : n.left;
  search(near, q, best);
  if (std::abs(delta) < best->distance) search(far, q, best);
}

KdTree3::Result KdTree3::nearest(const Eigen::Vector3d& q) const {
  if (points_.empty()) throw std::invalid_argument("KdTree3: empty tree");
  Result best;
  best.distance = std::numeric_limits<double>::infinity();
  search(root_, q, &best);
  return best;
}

// ---- metrics -------------------------------------------------------------

namespace {

// Min distance from each point of `from` to the set `to`. The brute-force
// path is the independent O(n^2) oracle behind --brute-force.
std::vector<double> nn_distances(const PointCloud& from, const PointCloud& to, bool brute_force) {
  if (from.points.empty() || to.points.empty())
    throw std::invalid_argument("metrics: empty point cloud");
  std::vector<double> d(from.points.size());
  if (brute_force) {
    for (std::size_t i = 0; i < from.points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to.points) best = std::min(best, (from.points[i] - q).norm());
      d[i] = best;
    }
  } else {
    KdTree3 tree(to.points);
    for (std::size_t i = 0; i < from.points.size(); ++i)
      d[i] = tree.nearest(from.points[i]).distance;
  }
  return d;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double RigidTransform::rotation_angle_deg() const {
  double c = std::clamp((rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / 3.14159265358979323846;
}

double chamfer(const PointCloud& a, const PointCloud& b, bool brute_force) {
  return 0.5 * (mean(nn_distances(a, b, brute_force)) + mean(nn_distances(b, a, brute_force)));
}

FscoreResult fscore(const PointCloud& a, const PointCloud& b, double tau, bool brute_force) {
  if (!(tau > 0)) throw std::invalid_argument("fscore: tau must be positive");
  auto frac_within = [tau](const std::vector<double>& d) {
    std::size_t count = 0;
    for (double x : d)
      if (x <= tau) ++count;
    return static_cast<double>(count) / static_cast<double>(d.size());
  };
  FscoreResult r;
  r.precision = frac_within(nn_distances(a, b, brute_force));
  r.recall = frac_within(nn_distances(b, a, brute_force));
  r.fscore = (r.precision + r.recall) > 0
                 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                 : 0.0;
  return r;
}

namespace {

RigidTransform kabsch(const std::vector<Eigen::Vector3d>& src,
                      const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (const auto& p : src) cs += p;
  for (const auto& p : dst) cd += p;
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  RigidTransform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = cd - t.rotation * cs;
  return t;
}

}  // namespace

IcpResult icp_align(const PointCloud& src, const PointCloud& dst, int max_iters, double tol) {
  if (src.points.size() < 3 || dst.points.size() < 3)
    throw std::invalid_argument("icp_align: need at least 3 points per cloud");
  {
    // Collinear input has a rank-deficient covariance.
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : src.points) c += p;
    c /= static_cast<double>(src.points.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : src.points) cov += (p - c) * (p - c).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov);
    if (svd.singularValues()[1] < 1e-12 * std::max(svd.singularValues()[0], 1e-300))
      throw std::invalid_argument("icp_align: degenerate (collinear) source cloud");
  }

  IcpResult result;
  // Centroid pre-alignment, identity rotation.
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (const auto& p : src.points) cs += p;
  for (const auto& p : dst.points) cd += p;
  cs /= static_cast<double>(src.points.size());
  cd /= static_cast<double>(dst.points.size());
  result.transform.translation = cd - cs;

  PointCloud current;
  current.points.reserve(src.points.size());
  for (const auto& p : src.points) current.points.push_back(p + result.transform.translation);

  KdTree3 tree(dst.points);
  std::vector<Eigen::Vector3d> corr(src.points.size());
  double prev_residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    double residual = 0;
    for (std::size_t i = 0; i < current.points.size(); ++i) {
      KdTree3::Result nn = tree.nearest(current.points[i]);
      corr[i] = dst.points[nn.index];
      residual += nn.distance * nn.distance;
    }
    // RMS residual: the quantity the least-squares rigid fit provably never
    // increases, so the logged history is monotone non-increasing.
    residual = std::sqrt(residual / static_cast<double>(current.points.size()));
    result.residual_history.push_back(residual);

    RigidTransform step = kabsch(current.points, corr);
    for (auto& p : current.points) p = step.apply(p);
    result.transform.rotation = step.rotation * result.transform.rotation;
    result.transform.translation = step.rotation * result.transform.translation + step.translation;

    if (std::abs(prev_residual - residual) < tol) break;
    prev_residual = residual;
  }
  result.aligned = std::move(current);
  return result;
}

MetricsReport evaluate_pair(const Mesh& pred, const Mesh& gt, const EvaluateOptions& opts) {
  if (pred.empty() || gt.empty()) throw std::invalid_argument("evaluate_pair: empty mesh");
  Mesh pred_n = normalize_to_unit_sphere(pred).mesh;
  Mesh gt_n = normalize_to_unit_sphere(gt).mesh;

  // Both meshes are sampled from the same seed so evaluating a mesh against
  // itself yields identical clouds (chamfer limited by geometry, not by two
  // independent samplings of the same surface).
  Rng rng_pred(opts.seed), rng_gt(opts.seed);
  PointCloud a = sample_surface(pred_n, opts.points, rng_pred);
  PointCloud b = sample_surface(gt_n, opts.points, rng_gt);

  MetricsReport report;
  if (opts.align) {
    IcpResult icp = icp_align(a, b);
    a = std::move(icp.aligned);
    report.icp_applied = true;
    report.icp_rotation_deg = icp.transform.rotation_angle_deg();
    report.icp_translation = icp.transform.translation;
  }
  report.chamfer = chamfer(a, b, opts.brute_force);
  for (double tau : opts.thresholds) {
    FscoreResult f = fscore(a, b, tau, opts.brute_force);
    report.fscore[tau] = f.fscore;
    report.precision[tau] = f.precision;
    report.recall[tau] = f.recall;
  }
  return report;
}

namespace {
std::string tau_key(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", tau);
  return buf;
}
}  // namespace

std::string MetricsReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"chamfer\": " << chamfer << ",\n  \"fscore\": {";
  bool first = true;
  for (const auto& [tau, f] : fscore) {
    os << (first ? "" : ", ") << "\"" << tau_key(tau) << "\": " << f;
    first = false;
  }
  os << "},\n  \"precision\": {";
  first = true;
  for (const auto& [tau, p] : precision) {
    os << (first ? "" : ", ") << "\"" << tau_key(tau) << "\": " << p;
    first = false;
  }
  os << "},\n  \"recall\": {";
  first = true;
  for (const auto& [tau, r] : recall) {
    os << (first ? "" : ", ") << "\"" << tau_key(tau) << "\": " << r;
    first = false;
  }
  os << "},\n  \"icp_applied\": " << (icp_applied ? "true" : "false");
  if (icp_applied) {
    os << ",\n  \"icp_rotation_deg\": " << icp_rotation_deg << ",\n  \"icp_translation\": ["
       << icp_translation.x() << ", " << icp_translation.y() << ", " << icp_translation.z() << "]";
  }
  os << "\n}";
  return os.str();
}

std::string MetricsReport::to_csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << chamfer;
  for (const auto& [tau, f] : fscore) os << "," << f;
  return os.str();
}

}  // namespace hy3d

#include "hy3d/sdf.hpp"

#include <algorithm>
#include <cmath>

namespace hy3d {

namespace {

class SphereSdf final : public Sdf {
 public:
  SphereSdf(double r, Eigen::Vector3d c) : radius_(r), center_(std::move(c)) {}
  double eval(const Eigen::Vector3d& p) const override { return (p - center_).norm() - radius_; }

 private:
  double radius_;
  Eigen::Vector3d center_;
};

class BoxSdf final : public Sdf {
 public:
  explicit BoxSdf(Eigen::Vector3d half) : half_(std::move(half)) {}
  double eval(const Eigen::Vector3d& p) const override {
    Eigen::Vector3d q = p.cwiseAbs() - half_;
    Eigen::Vector3d q_pos = q.cwiseMax(0.0);
    double outside = q_pos.norm();
    double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
  }

 private:
  Eigen::Vector3d half_;
};

class TorusSdf final : public Sdf {
 public:
  TorusSdf(double major, double minor) : major_(major), minor_(minor) {}
  double eval(const Eigen::Vector3d& p) const override {
    double q = std::hypot(p.x(), p.y()) - major_;
    return std::hypot(q, p.z()) - minor_;
  }

 private:
  double major_, minor_;
};

enum class CsgOp { Union, Subtract, Intersect };

class CsgSdf final : public Sdf {
 public:
  CsgSdf(CsgOp op, SdfPtr a, SdfPtr b) : op_(op), a_(std::move(a)), b_(std::move(b)) {}
  double eval(const Eigen::Vector3d& p) const override {
    double va = a_->eval(p), vb = b_->eval(p);
    switch (op_) {
      case CsgOp::Union: return std::min(va, vb);
      case CsgOp::Subtract: return std::max(va, -vb);
      case CsgOp::Intersect: break;
    }
    return std::max(va, vb);
  }

 private:
  CsgOp op_;
  SdfPtr a_, b_;
};

}  // namespace

SdfPtr make_sphere(double radius, const Eigen::Vector3d& center) {
  return std::make_shared<SphereSdf>(radius, center);
}
SdfPtr make_box(const Eigen::Vector3d& half_extents) {
  return std::make_shared<BoxSdf>(half_extents);
}
SdfPtr make_torus(double major_radius, double minor_radius) {
  return std::make_shared<TorusSdf>(major_radius, minor_radius);
}
SdfPtr make_union(SdfPtr a, SdfPtr b) {
  return std::make_shared<CsgSdf>(CsgOp::Union, std::move(a), std::move(b));
}
SdfPtr make_subtract(SdfPtr a, SdfPtr b) {
  return std::make_shared<CsgSdf>(CsgOp::Subtract, std::move(a), std::move(b));
}
SdfPtr make_intersect(SdfPtr a, SdfPtr b) {
  return std::make_shared<CsgSdf>(CsgOp::Intersect, std::move(a), std::move(b));
}

SdfPtr make_dented_sphere(double radius, const Eigen::Vector3d& dent_direction,
                          double dent_radius, double dent_depth) {
  Eigen::Vector3d dir = dent_direction.normalized();
  // Cutter surface reaches depth `dent_depth` below the sphere surface.
  Eigen::Vector3d center = dir * (radius + dent_radius - dent_depth);
  return make_subtract(make_sphere(radius), make_sphere(dent_radius, center));
}

Eigen::Vector3d sdf_gradient(const Sdf& shape, const Eigen::Vector3d& p) {
  constexpr double h = 1e-4;
  Eigen::Vector3d g;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d dp = Eigen::Vector3d::Zero();
    dp[i] = h;
    g[i] = (shape.eval(p + dp) - shape.eval(p - dp)) / (2 * h);
  }
  return g;
}

}  // namespace hy3d

#pragma once

#include <Eigen/Dense>
#include <memory>

namespace hy3d {

/// Analytic signed distance field: negative inside, positive outside.
/// Exact for the primitives; CSG nodes give the usual conservative min/max bound.
class Sdf {
 public:
  virtual ~Sdf() = default;
  virtual double eval(const Eigen::Vector3d& p) const = 0;
};

using SdfPtr = std::shared_ptr<const Sdf>;

SdfPtr make_sphere(double radius, const Eigen::Vector3d& center = Eigen::Vector3d::Zero());
SdfPtr make_box(const Eigen::Vector3d& half_extents);
SdfPtr make_torus(double major_radius, double minor_radius);  // in the xy-plane
SdfPtr make_union(SdfPtr a, SdfPtr b);
SdfPtr make_subtract(SdfPtr a, SdfPtr b);
SdfPtr make_intersect(SdfPtr a, SdfPtr b);

/// Sphere with a spherical bite taken out of it. The cutting ball sits along
/// `dent_direction` so that it reaches `dent_depth` into the surface.
SdfPtr make_dented_sphere(double radius, const Eigen::Vector3d& dent_direction,
                          double dent_radius, double dent_depth);

/// Central-difference gradient, step 1e-4.
Eigen::Vector3d sdf_gradient(const Sdf& shape, const Eigen::Vector3d& p);

}  // namespace hy3d

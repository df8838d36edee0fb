#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hy3d {

/// Static 3D kd-tree for exact nearest-neighbor queries.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Eigen::Vector3d>& points);

  struct Result {
    int index = -1;
    double distance = 0.0;
  };
  Result nearest(const Eigen::Vector3d& query) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };
  int build(int begin, int end, int depth);
  void search(int node, const Eigen::Vector3d& q, Result* best) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace hy3d

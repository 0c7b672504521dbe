#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <stdexcept>
#include <string>
#include <vector>

namespace primitect {

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

using PointCloud = std::vector<Point3>;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Similarity transform in the plane: q = c * R * p + t.
struct SimilarityPose2 {
  Mat2 R = Mat2::Identity();
  Point2 t = Point2::Zero();
  double c = 1.0;

  Point2 apply(const Point2& p) const { return c * (R * p) + t; }
};

/// General planar affine transform: q = S * p + t.
struct AffinePose2 {
  Mat2 S = Mat2::Identity();
  Point2 t = Point2::Zero();

  Point2 apply(const Point2& p) const { return S * p + t; }
};

}  // namespace primitect

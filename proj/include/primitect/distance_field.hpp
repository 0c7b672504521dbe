#pragma once

#include "primitect/types.hpp"

namespace primitect {

/// Voxel grid of exact distances to the nearest input point. Values live at
/// voxel centers; origin is the lower corner of voxel (0,0,0).
struct DistanceField {
  Point3 origin = Point3::Zero();
  double voxel = 0.5;
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> values;

  double at(int i, int j, int k) const {
    return values[(static_cast<size_t>(k) * ny + j) * nx + i];
  }
  Point3 center(int i, int j, int k) const {
    return origin + voxel * Point3(i + 0.5, j + 0.5, k + 0.5);
  }
};

struct FieldSample {
  double value = 0.0;
  Point3 gradient = Point3::Zero();
  bool clamped = false;  // query outside the padded grid
};

/// Grid covers the cloud bounding box padded by pad on every side.
DistanceField build_distance_field(const PointCloud& pc, double voxel, double pad);

/// Trilinear interpolation of the stored values; gradient by central
/// differences of the interpolant.
FieldSample field_sample(const DistanceField& f, const Point3& q);

}  // namespace primitect

#pragma once

#include <cstdint>
#include <optional>

#include "primitect/polygon.hpp"
#include "primitect/types.hpp"

namespace primitect {

/// Rasterized max-elevation surface. Cell (i, j) covers the square whose
/// lower-left corner is origin + (i, j) * cell_size; its sample position is
/// the cell center.
struct RasterDSM {
  Point2 origin = Point2::Zero();
  double cell_size = 1.0;
  int width = 0;
  int height = 0;
  std::vector<double> z;       // row-major, height rows of width
  std::vector<uint8_t> valid;  // 0 = empty-marked

  double at(int i, int j) const { return z[static_cast<size_t>(j) * width + i]; }
  bool is_valid(int i, int j) const {
    return valid[static_cast<size_t>(j) * width + i] != 0;
  }
  Point2 sample_pos(int i, int j) const {
    return origin + Point2((i + 0.5) * cell_size, (j + 0.5) * cell_size);
  }
};

struct ContourSet {
  std::vector<Polygon> contours;
  double interval = 1.0;
  double base = 0.0;
};

/// Removes ground returns: points are kept when their height above the
/// morphologically opened (erode-then-dilate) min-z surface exceeds
/// slope_tol * window * cell.
PointCloud morphological_ground_filter(const PointCloud& pc, double cell,
                                       int window, double slope_tol);

/// Max-z gridding; empty cells are filled from the nearest valid cell within
/// 3 cells, farther gaps stay empty-marked.
RasterDSM rasterize_dsm(const PointCloud& pc, double cell);

/// Marching-squares level sets at base + k * interval. Polylines that fail to
/// close (including all boundary-touching ones) are discarded; closed ones are
/// simplified by collinear-vertex merging and returned CCW, sorted by
/// elevation then centroid.
ContourSet trace_contours(const RasterDSM& dsm, double interval, double base);

}  // namespace primitect

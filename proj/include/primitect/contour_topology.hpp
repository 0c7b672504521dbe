#pragma once

#include "primitect/contouring.hpp"

namespace primitect {

struct AttributeThresholds {
  double min_area = 50.0;      // m^2, root footprint
  double max_area = 50000.0;   // m^2
  double min_height = 2.5;     // m
  double min_circularity = 0.25;
};

/// Nesting forest over a contour set: a contour's parent is the smallest-area
/// contour one level below that contains its centroid.
struct NestingForest {
  const ContourSet* contours = nullptr;
  std::vector<int> parent;               // -1 for roots
  std::vector<std::vector<int>> children;
  std::vector<int> roots;
  // Contours whose own centroid falls outside themselves (crescents); nesting
  // still uses the centroid but these are surfaced in reports.
  std::vector<int> suspect_contours;
};

struct BuildingCluster {
  std::vector<Polygon> contours;  // sorted by elevation ascending
  PointCloud points;
  double footprint_area = 0.0;
  double height = 0.0;
  double mean_circularity = 0.0;
};

NestingForest build_nesting_forest(const ContourSet& cs);

/// Keeps trees whose attributes look like buildings; trees with fewer than
/// two contours are always dropped (no height).
std::vector<BuildingCluster> extract_buildings(const NestingForest& f,
                                               const AttributeThresholds& thresholds);

/// Points inside the building's lowest contour footprint at or above its
/// elevation. Returns an empty cloud when nothing matches (caller drops the
/// building).
PointCloud segment_points(const PointCloud& pc, const BuildingCluster& b);

}  // namespace primitect

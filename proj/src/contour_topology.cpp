#include "primitect/contour_topology.hpp"

#include <algorithm>
#include <cmath>

namespace primitect {

NestingForest build_nesting_forest(const ContourSet& cs) {
  const auto& polys = cs.contours;
  const int n = static_cast<int>(polys.size());
  NestingForest f;
  f.contours = &cs;
  f.parent.assign(n, -1);
  f.children.assign(n, {});

  std::vector<Point2> centroids(n);
  std::vector<double> areas(n);
  for (int i = 0; i < n; ++i) {
    centroids[i] = polygon_centroid(polys[i]);
    areas[i] = polygon_area(polys[i]);
    if (!point_in_polygon(centroids[i], polys[i])) {
      f.suspect_contours.push_back(i);
    }
  }

  const double level_eps = 0.5 * cs.interval;
  for (int i = 0; i < n; ++i) {
    const double parent_level = polys[i].elevation - cs.interval;
    int best = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(polys[j].elevation - parent_level) > level_eps) continue;
      if (!point_in_polygon(centroids[i], polys[j])) continue;
      if (best < 0 || areas[j] < areas[best]) best = j;
    }
    f.parent[i] = best;
    if (best >= 0) f.children[best].push_back(i);
  }

  // Mutual centroid containment between same-level contours means they cross.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(polys[i].elevation - polys[j].elevation) > level_eps) continue;
      if (point_in_polygon(centroids[i], polys[j]) &&
          point_in_polygon(centroids[j], polys[i]) &&
          std::abs(areas[i] - areas[j]) < 1e-9 * std::max(areas[i], areas[j])) {
        throw DegenerateGeometry("crossing contours at one level");
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (f.parent[i] < 0) f.roots.push_back(i);
  }
  return f;
}

std::vector<BuildingCluster> extract_buildings(const NestingForest& f,
                                               const AttributeThresholds& th) {
  std::vector<BuildingCluster> out;
  const auto& polys = f.contours->contours;

  for (int root : f.roots) {
    std::vector<int> members;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      members.push_back(c);
      for (int child : f.children[c]) stack.push_back(child);
    }
    if (members.size() < 2) continue;  // single contour cannot define height

    std::sort(members.begin(), members.end(), [&](int a, int b) {
      return polys[a].elevation < polys[b].elevation;
    });

    BuildingCluster b;
    double circ_sum = 0.0;
    for (int c : members) {
      b.contours.push_back(polys[c]);
      circ_sum += circularity(polys[c]);
    }
    b.footprint_area = polygon_area(b.contours.front());
    b.height = b.contours.back().elevation - b.contours.front().elevation;
    b.mean_circularity = circ_sum / members.size();

    if (b.footprint_area < th.min_area || b.footprint_area > th.max_area) continue;
    if (b.height < th.min_height) continue;
    if (b.mean_circularity < th.min_circularity) continue;
    out.push_back(std::move(b));
  }
  return out;
}

PointCloud segment_points(const PointCloud& pc, const BuildingCluster& b) {
  if (b.contours.empty()) throw InvalidInput("segment_points: building has no contours");
  const Polygon& footprint = b.contours.front();
  PointCloud out;
  for (const Point3& p : pc) {
    if (p.z() < footprint.elevation) continue;
    if (point_in_polygon(p.head<2>(), footprint)) out.push_back(p);
  }
  return out;
}

}  // namespace primitect

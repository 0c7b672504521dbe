#pragma once

#include "primitect/types.hpp"

namespace primitect {

/// Closed planar polygon at a fixed elevation. The vertex list is implicitly
/// closed (last vertex connects back to the first).
struct Polygon {
  std::vector<Point2> vertices;
  double elevation = 0.0;
};

double polygon_signed_area(const Polygon& p);
double polygon_area(const Polygon& p);
double polygon_perimeter(const Polygon& p);

/// Signed-area-weighted centroid, correct for concave polygons.
Point2 polygon_centroid(const Polygon& p);

/// Even-odd containment; points on the boundary count as inside.
bool point_in_polygon(const Point2& q, const Polygon& p);

/// Compactness index 4*pi*A / P^2, in (0, 1] for simple polygons.
double circularity(const Polygon& p);

/// Resamples the closed boundary at n equal arc-length intervals. The start
/// vertex is the boundary intersection with the +x ray from the centroid
/// (farthest such intersection), so correspondence is reproducible.
Polygon resample_closed(const Polygon& p, int n);

}  // namespace primitect

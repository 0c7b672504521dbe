#include "primitect/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace primitect {

namespace {

void require_valid(const Polygon& p) {
  if (p.vertices.size() < 3) {
    throw InvalidInput("polygon needs at least 3 vertices");
  }
}

// Distance from q to segment [a, b].
double segment_distance(const Point2& q, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (q - a).norm();
  const double s = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return (q - (a + s * ab)).norm();
}

}  // namespace

double polygon_signed_area(const Polygon& p) {
  require_valid(p);
  double twice = 0.0;
  const auto& v = p.vertices;
  for (size_t i = 0, n = v.size(); i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

double polygon_area(const Polygon& p) { return std::abs(polygon_signed_area(p)); }

double polygon_perimeter(const Polygon& p) {
  require_valid(p);
  double len = 0.0;
  const auto& v = p.vertices;
  for (size_t i = 0, n = v.size(); i < n; ++i) {
    len += (v[(i + 1) % n] - v[i]).norm();
  }
  return len;
}

Point2 polygon_centroid(const Polygon& p) {
  require_valid(p);
  const auto& v = p.vertices;
  double twice = 0.0;
  Point2 acc = Point2::Zero();
  for (size_t i = 0, n = v.size(); i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    const double cross = a.x() * b.y() - b.x() * a.y();
    twice += cross;
    acc += cross * (a + b);
  }
  if (std::abs(twice) < 1e-300) {
    throw DegenerateGeometry("zero-area polygon has no centroid");
  }
  return acc / (3.0 * twice);
}

bool point_in_polygon(const Point2& q, const Polygon& p) {
  require_valid(p);
  const auto& v = p.vertices;
  const size_t n = v.size();

  // Boundary counts as inside.
  constexpr double kBoundaryEps = 1e-12;
  for (size_t i = 0; i < n; ++i) {
    if (segment_distance(q, v[i], v[(i + 1) % n]) <= kBoundaryEps) return true;
  }

  // Even-odd ray crossing toward +x.
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = v[i];
    const Point2& b = v[j];
    const bool straddles = (a.y() > q.y()) != (b.y() > q.y());
    if (straddles) {
      const double x_cross = a.x() + (q.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (q.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

double circularity(const Polygon& p) {
  const double area = polygon_area(p);
  const double perim = polygon_perimeter(p);
  if (area <= 0.0 || perim <= 0.0) {
    throw DegenerateGeometry("degenerate polygon has no circularity");
  }
  return 4.0 * std::numbers::pi * area / (perim * perim);
}

Polygon resample_closed(const Polygon& p, int n) {
  require_valid(p);
  if (n < 4) throw InvalidInput("resample_closed needs n >= 4");
  const auto& v = p.vertices;
  const size_t m = v.size();
  const Point2 centroid = polygon_centroid(p);

  // Start point: farthest intersection of the boundary with the +x ray from
  // the centroid. Falls back to the vertex with maximum x if the ray grazes
  // nothing (cannot happen for simple polygons containing their centroid).
  double best_x = -std::numeric_limits<double>::infinity();
  size_t best_edge = 0;
  double best_s = 0.0;
  bool found = false;
  for (size_t i = 0; i < m; ++i) {
    const Point2 a = v[i] - centroid;
    const Point2 b = v[(i + 1) % m] - centroid;
    if ((a.y() > 0.0) == (b.y() > 0.0)) continue;
    const double s = a.y() / (a.y() - b.y());
    const double x = a.x() + s * (b.x() - a.x());
    if (x > 0.0 && x > best_x) {
      best_x = x;
      best_edge = i;
      best_s = s;
      found = true;
    }
  }
  if (!found) {
    for (size_t i = 0; i < m; ++i) {
      if (v[i].x() > best_x) {
        best_x = v[i].x();
        best_edge = i;
        best_s = 0.0;
      }
    }
  }

  // Boundary rebuilt starting from the chosen point.
  std::vector<Point2> loop;
  loop.reserve(m + 1);
  {
    const Point2 start =
        v[best_edge] + best_s * (v[(best_edge + 1) % m] - v[best_edge]);
    loop.push_back(start);
    for (size_t k = 1; k <= m; ++k) {
      loop.push_back(v[(best_edge + k) % m]);
    }
    loop.push_back(start);
  }

  std::vector<double> arc(loop.size(), 0.0);
  for (size_t i = 1; i < loop.size(); ++i) {
    arc[i] = arc[i - 1] + (loop[i] - loop[i - 1]).norm();
  }
  const double total = arc.back();
  if (total <= 0.0) throw DegenerateGeometry("zero-perimeter polygon");

  Polygon out;
  out.elevation = p.elevation;
  out.vertices.reserve(static_cast<size_t>(n));
  size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    const double target = total * static_cast<double>(i) / n;
    while (seg + 2 < arc.size() && arc[seg + 1] < target) ++seg;
    const double span = arc[seg + 1] - arc[seg];
    const double s = span > 0.0 ? (target - arc[seg]) / span : 0.0;
    out.vertices.push_back(loop[seg] + s * (loop[seg + 1] - loop[seg]));
  }
  return out;
}

}  // namespace primitect

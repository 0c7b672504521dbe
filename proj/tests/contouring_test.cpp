#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "primitect/contouring.hpp"

using namespace primitect;

namespace {

void add_ring(PointCloud& pc, const Point2& c, double r, double z,
              double step = 0.15) {
  const int n = std::max(8, static_cast<int>(2.0 * std::numbers::pi * r / step));
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    pc.emplace_back(c.x() + r * std::cos(a), c.y() + r * std::sin(a), z);
  }
}

void add_grid(PointCloud& pc, double x0, double y0, double x1, double y1,
              double step, double z) {
  for (double x = x0; x <= x1; x += step) {
    for (double y = y0; y <= y1; y += step) {
      pc.emplace_back(x, y, z);
    }
  }
}

PointCloud hemisphere_cloud(const Point2& c, double R) {
  PointCloud pc;
  add_grid(pc, c.x() - R - 4, c.y() - R - 4, c.x() + R + 4, c.y() + R + 4, 0.4, 0.0);
  for (double phi = 0.0; phi < 0.5 * std::numbers::pi; phi += 0.15 / R) {
    add_ring(pc, c, R * std::cos(phi), R * std::sin(phi));
  }
  return pc;
}

double mean_radius(const Polygon& p, const Point2& c) {
  double acc = 0.0;
  for (const Point2& v : p.vertices) acc += (v - c).norm();
  return acc / p.vertices.size();
}

}  // namespace

TEST_CASE("ground filter keeps a box and drops flat terrain") {
  PointCloud pc;
  add_grid(pc, 0, 0, 40, 40, 0.5, 0.0);
  const size_t n_ground = pc.size();
  add_grid(pc, 10, 10, 14, 14, 0.25, 5.0);  // flat roof
  for (double z = 0.5; z < 5.0; z += 0.5) {  // walls
    add_grid(pc, 10, 10, 14, 10, 0.25, z);
    add_grid(pc, 10, 14, 14, 14, 0.25, z);
  }
  const size_t n_total = pc.size();

  const PointCloud kept = morphological_ground_filter(pc, 1.0, 9, 0.3);
  // Threshold is slope_tol * window * cell = 2.7 m: every survivor is well
  // above ground and every roof point survives.
  CHECK(kept.size() < n_total - n_ground + 100);
  size_t roof = 0;
  for (const Point3& p : kept) {
    CHECK(p.z() > 2.6);
    roof += p.z() == doctest::Approx(5.0);
  }
  CHECK(roof == doctest::Approx(17 * 17).epsilon(0.02));  // 4 m / 0.25 + 1 per side
}

TEST_CASE("ground filter rejects bad windows") {
  PointCloud pc{{0, 0, 0}};
  CHECK_THROWS_AS(morphological_ground_filter(pc, 1.0, 4, 0.3), InvalidInput);
  CHECK_THROWS_AS(morphological_ground_filter(PointCloud{}, 1.0, 9, 0.3),
                  InvalidInput);
}

TEST_CASE("rasterization takes per-cell maxima and fills small gaps") {
  PointCloud pc;
  add_grid(pc, 0, 0, 10, 10, 0.4, 1.0);
  pc.emplace_back(5.2, 5.2, 7.5);  // a higher return in one cell
  const RasterDSM dsm = rasterize_dsm(pc, 1.0);
  bool saw_peak = false;
  for (int j = 0; j < dsm.height; ++j) {
    for (int i = 0; i < dsm.width; ++i) {
      REQUIRE(dsm.is_valid(i, j));
      if (dsm.at(i, j) == doctest::Approx(7.5)) saw_peak = true;
    }
  }
  CHECK(saw_peak);
}

TEST_CASE("cells far from any point stay empty-marked") {
  // Two distant clusters; the void between them exceeds the 3-cell fill reach.
  PointCloud pc;
  add_grid(pc, 0, 0, 2, 2, 0.4, 1.0);
  add_grid(pc, 20, 20, 22, 22, 0.4, 2.0);
  const RasterDSM dsm = rasterize_dsm(pc, 1.0);
  int invalid = 0;
  for (int j = 0; j < dsm.height; ++j) {
    for (int i = 0; i < dsm.width; ++i) invalid += !dsm.is_valid(i, j);
  }
  CHECK(invalid > 10);
}

TEST_CASE("hemisphere level sets have the analytic radii") {
  const Point2 c(15, 15);
  const double R = 8.0;
  const RasterDSM dsm = rasterize_dsm(hemisphere_cloud(c, R), 0.5);
  const ContourSet cs = trace_contours(dsm, 1.0, 0.0);
  REQUIRE(cs.contours.size() >= 6);
  for (const Polygon& p : cs.contours) {
    const double h = p.elevation;
    REQUIRE(h > 0.0);
    if (h >= R - 0.5) continue;  // apex cap is raster-limited
    const double expected = std::sqrt(R * R - h * h);
    CHECK(mean_radius(p, c) == doctest::Approx(expected).epsilon(0.12));
    CHECK(polygon_signed_area(p) > 0.0);  // returned counter-clockwise
  }
}

TEST_CASE("a sub-interval ramp produces no contours") {
  PointCloud pc;
  for (double x = 0; x <= 20; x += 0.4) {
    for (double y = 0; y <= 20; y += 0.4) {
      pc.emplace_back(x, y, 0.9 * x / 20.0);  // rises 0..0.9 < interval
    }
  }
  const ContourSet cs = trace_contours(rasterize_dsm(pc, 0.5), 1.0, 0.0);
  CHECK(cs.contours.empty());
}

TEST_CASE("two towers contour independently with the right counts") {
  PointCloud pc;
  add_grid(pc, 0, 0, 40, 20, 0.4, 0.0);
  // Roofs sit just above the top level so the highest set still crosses.
  for (double z = 0.0; z <= 5.2; z += 0.2) add_ring(pc, {10, 10}, 4.0, z);
  add_grid(pc, 6.3, 6.3, 13.7, 13.7, 0.3, 5.2);
  for (double z = 0.0; z <= 3.2; z += 0.2) add_ring(pc, {30, 10}, 3.0, z);
  add_grid(pc, 27.2, 7.2, 32.8, 12.8, 0.3, 3.2);
  const ContourSet cs = trace_contours(rasterize_dsm(pc, 0.5), 1.0, 0.0);

  // Tower one spans levels 1..5, tower two levels 1..3.
  int left = 0, right = 0;
  for (const Polygon& p : cs.contours) {
    const Point2 c = polygon_centroid(p);
    if ((c - Point2(10, 10)).norm() < 2.0) ++left;
    if ((c - Point2(30, 10)).norm() < 2.0) ++right;
  }
  CHECK(left == 5);
  CHECK(right == 3);
  CHECK(static_cast<int>(cs.contours.size()) == left + right);
}

TEST_CASE("contours are sorted by elevation") {
  const ContourSet cs =
      trace_contours(rasterize_dsm(hemisphere_cloud({15, 15}, 8.0), 0.5), 1.0, 0.0);
  for (size_t i = 1; i < cs.contours.size(); ++i) {
    CHECK(cs.contours[i].elevation >= cs.contours[i - 1].elevation);
  }
}

TEST_CASE("interval must be positive") {
  PointCloud pc;
  add_grid(pc, 0, 0, 5, 5, 0.5, 1.0);
  const RasterDSM dsm = rasterize_dsm(pc, 1.0);
  CHECK_THROWS_AS(trace_contours(dsm, 0.0, 0.0), InvalidInput);
}

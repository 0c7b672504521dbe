#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "primitect/procrustes.hpp"

using namespace primitect;

namespace {

// Smooth closed star-like curve sampled at n parameter values.
std::vector<Point2> smooth_curve(int n, double r = 3.0, double wobble = 0.4,
                                 int lobes = 5) {
  std::vector<Point2> out;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    const double rr = r + wobble * std::sin(lobes * a);
    out.emplace_back(rr * std::cos(a), rr * std::sin(a));
  }
  return out;
}

Correspondence transformed_pair(const std::vector<Point2>& src, const Mat2& M,
                                const Point2& t, double noise = 0.0,
                                unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, noise);
  Correspondence c;
  c.source = src;
  for (const Point2& p : src) {
    Point2 q = M * p + t;
    if (noise > 0.0) q += Point2(g(rng), g(rng));
    c.target.push_back(q);
  }
  return c;
}

Mat2 rot(double theta) {
  Mat2 R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return R;
}

double mean_distance(const Correspondence& c, const Mat2& M, const Point2& t) {
  double acc = 0.0;
  for (size_t i = 0; i < c.source.size(); ++i) {
    acc += (M * c.source[i] + t - c.target[i]).norm();
  }
  return acc / c.source.size();
}

Polygon circle_contour(double r, double elevation, int n = 64,
                       double phase = 0.0) {
  Polygon p;
  p.elevation = elevation;
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / n;
    p.vertices.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return p;
}

Polygon square_contour(double half, double elevation) {
  Polygon p;
  p.elevation = elevation;
  p.vertices = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
  return p;
}

}  // namespace

TEST_CASE("similarity alignment recovers a known pose exactly") {
  const auto src = smooth_curve(100);
  const Mat2 M = 2.0 * rot(0.5 * std::numbers::pi);
  const Point2 t(3.0, -1.0);
  const PAResult r = solve_pa(transformed_pair(src, M, t));
  CHECK(r.residual == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(r.pose.c == doctest::Approx(2.0));
  CHECK((r.pose.c * r.pose.R - M).norm() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK((r.pose.t - t).norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("similarity alignment matches an exhaustive grid oracle") {
  const auto src = smooth_curve(100);
  const Mat2 M = 1.4 * rot(1.1);
  const Correspondence c = transformed_pair(src, M, Point2(5, 2), 0.05);
  const PAResult r = solve_pa(c);

  // Independent oracle: sweep rotation and scale, translation in closed form
  // from the centroids, track the best mean distance.
  Point2 ms = Point2::Zero(), mt = Point2::Zero();
  for (size_t i = 0; i < c.source.size(); ++i) {
    ms += c.source[i];
    mt += c.target[i];
  }
  ms /= c.source.size();
  mt /= c.source.size();
  double best = 1e300;
  for (double theta = 0.0; theta < 2.0 * std::numbers::pi; theta += 0.004) {
    for (double s = 1.0; s < 1.9; s += 0.004) {
      const Mat2 T = s * rot(theta);
      best = std::min(best, mean_distance(c, T, mt - T * ms));
    }
  }
  CHECK(r.residual <= best * 1.02);
  CHECK(r.residual >= best * 0.90);  // the oracle grid is near-exhaustive
}

TEST_CASE("affine alignment absorbs shear that similarity cannot") {
  const auto src = smooth_curve(120);
  Mat2 shear;
  shear << 1.0, 0.35, 0.0, 1.0;
  const Correspondence c = transformed_pair(src, shear, Point2(1, 1));
  const MPAResult affine = solve_mpa(c);
  const PAResult similar = solve_pa(c);
  CHECK(affine.residual == doctest::Approx(0.0).epsilon(1e-10));
  CHECK((affine.pose.S - shear).norm() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(similar.residual > 0.05);
}

TEST_CASE("affine solution equals a dense six-unknown least-squares oracle") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  Correspondence c;
  for (int i = 0; i < 1000; ++i) {
    c.source.emplace_back(3.0 * g(rng), 3.0 * g(rng));
    c.target.emplace_back(g(rng) + 0.4 * c.source.back().x(),
                          g(rng) - 0.2 * c.source.back().y());
  }
  const MPAResult r = solve_mpa(c);

  // Oracle: assemble the full 2n x 6 system for q = S p + t and solve the
  // normal equations directly.
  Eigen::MatrixXd A(2 * c.source.size(), 6);
  Eigen::VectorXd b(2 * c.source.size());
  for (size_t i = 0; i < c.source.size(); ++i) {
    const Point2& p = c.source[i];
    A.row(2 * i) << p.x(), p.y(), 0, 0, 1, 0;
    A.row(2 * i + 1) << 0, 0, p.x(), p.y(), 0, 1;
    b[2 * i] = c.target[i].x();
    b[2 * i + 1] = c.target[i].y();
  }
  const Eigen::VectorXd x = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  Mat2 S;
  S << x[0], x[1], x[2], x[3];
  const Point2 t(x[4], x[5]);

  CHECK((r.pose.S - S).norm() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK((r.pose.t - t).norm() == doctest::Approx(0.0).epsilon(1e-9));
  double acc = 0.0;
  for (size_t i = 0; i < c.source.size(); ++i) {
    acc += (S * c.source[i] + t - c.target[i]).norm();
  }
  CHECK(r.residual == doctest::Approx(acc / c.source.size()).epsilon(1e-9));
}

TEST_CASE("affine fit error never exceeds the similarity fit error") {
  // The guarantee is on the minimized sum of squares: similarities are a
  // subset of affinities. (The reported mean-of-norms residual can cross by a
  // hair on noisy data, so the check compares the squared objectives.)
  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 0.15);
  for (int rep = 0; rep < 25; ++rep) {
    const auto src = smooth_curve(80, 2.0 + 0.1 * rep, 0.3, 3 + rep % 4);
    const Mat2 M = (0.8 + 0.05 * rep) * rot(0.25 * rep);
    Correspondence c = transformed_pair(src, M, Point2(rep, -rep), 0.0, 100 + rep);
    for (Point2& q : c.target) q += Point2(g(rng), g(rng));
    const PAResult pa = solve_pa(c);
    const MPAResult mpa = solve_mpa(c);
    double sq_pa = 0.0, sq_mpa = 0.0;
    for (size_t i = 0; i < c.source.size(); ++i) {
      sq_pa += (pa.pose.apply(c.source[i]) - c.target[i]).squaredNorm();
      sq_mpa += (mpa.pose.apply(c.source[i]) - c.target[i]).squaredNorm();
    }
    CHECK(sq_mpa <= sq_pa + 1e-12);
    CHECK(mpa.residual <= pa.residual * 1.01);  // near-tie at worst
  }
}

TEST_CASE("residuals are invariant to a shared rigid motion") {
  const auto src = smooth_curve(90);
  const Correspondence c =
      transformed_pair(src, 1.3 * rot(0.7), Point2(2, 4), 0.1);
  const double pa0 = solve_pa(c).residual;
  const double mpa0 = solve_mpa(c).residual;

  const Mat2 R = rot(1.9);
  const Point2 shift(-7.0, 3.5);
  Correspondence moved;
  for (size_t i = 0; i < c.source.size(); ++i) {
    moved.source.push_back(R * c.source[i] + shift);
    moved.target.push_back(R * c.target[i] + shift);
  }
  CHECK(solve_pa(moved).residual == doctest::Approx(pa0).epsilon(1e-9));
  CHECK(solve_mpa(moved).residual == doctest::Approx(mpa0).epsilon(1e-9));
}

TEST_CASE("normalized distance divides by the target area") {
  const Polygon a = circle_contour(4.0, 1.0);
  const Polygon b = square_contour(4.0, 2.0);
  const ContourMatch m = match_contours(a, b, 128, DistanceMode::MPA);
  CHECK(m.normalized ==
        doctest::Approx(m.residual / polygon_area(b)).epsilon(1e-12));
}

TEST_CASE("matching scale is reciprocal under swap") {
  const Polygon small = circle_contour(2.0, 1.0);
  const Polygon big = circle_contour(5.0, 2.0);
  const ContourMatch up = match_contours(small, big, 128, DistanceMode::PA);
  const ContourMatch down = match_contours(big, small, 128, DistanceMode::PA);
  CHECK(up.scale == doctest::Approx(2.5).epsilon(1e-3));
  CHECK(up.scale * down.scale == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("matching is invariant to cyclic relabeling of the source") {
  Polygon a = circle_contour(3.0, 1.0, 64, 0.3);
  const Polygon b = square_contour(3.0, 2.0);
  const ContourMatch m0 = match_contours(a, b, 128, DistanceMode::PA);
  std::rotate(a.vertices.begin(), a.vertices.begin() + 17, a.vertices.end());
  const ContourMatch m1 = match_contours(a, b, 128, DistanceMode::PA);
  CHECK(m1.residual == doctest::Approx(m0.residual).epsilon(1e-6));
}

TEST_CASE("division cuts at a shape change via the residual") {
  // Four clean squares, then four clean circles of matching size: the only
  // non-trivial pair is the junction, so any threshold between the internal
  // (numerically zero) and junction residuals separates the stack.
  std::vector<Polygon> contours;
  for (int i = 0; i < 4; ++i) contours.push_back(square_contour(4.0, 1.0 + i));
  for (int i = 0; i < 4; ++i) contours.push_back(circle_contour(4.4, 5.0 + i));
  DivisionParams params;
  params.d_tilde_max = 0.002;
  const PrimitiveDivision d = divide_into_primitives(contours, params);
  REQUIRE(d.groups.size() == 2);
  CHECK(d.groups[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(d.groups[1] == std::vector<int>{4, 5, 6, 7});
}

TEST_CASE("division cuts at an isolated scale jump") {
  // Cylinder-like constant radii, then a much smaller slowly tapering stack:
  // every shape is a circle, so only the scale sequence reveals the junction.
  std::vector<Polygon> contours;
  for (int i = 0; i < 5; ++i) contours.push_back(circle_contour(5.0, 1.0 + i));
  for (int i = 0; i < 4; ++i) {
    contours.push_back(circle_contour(2.5 - 0.05 * i, 6.0 + i));
  }
  const PrimitiveDivision d = divide_into_primitives(contours, DivisionParams{});
  REQUIRE(d.groups.size() == 2);
  CHECK(d.groups[0].size() == 5);
  CHECK(d.groups[1].size() == 4);
}

TEST_CASE("a steady taper is not divided") {
  std::vector<Polygon> contours;
  for (int i = 0; i < 10; ++i) {
    contours.push_back(circle_contour(6.0 * std::pow(0.9, i), 1.0 + i));
  }
  const PrimitiveDivision d = divide_into_primitives(contours, DivisionParams{});
  CHECK(d.groups.size() == 1);
}

TEST_CASE("division is invariant to input ordering") {
  std::vector<Polygon> contours;
  for (int i = 0; i < 5; ++i) contours.push_back(circle_contour(5.0, 1.0 + i));
  for (int i = 0; i < 4; ++i) contours.push_back(square_contour(2.0, 6.0 + i));
  DivisionParams params;
  params.d_tilde_max = 0.002;
  const PrimitiveDivision forward = divide_into_primitives(contours, params);

  std::vector<Polygon> reversed(contours.rbegin(), contours.rend());
  const PrimitiveDivision backward = divide_into_primitives(reversed, params);

  // Map backward indices to forward ones (i -> n-1-i) and compare group sets.
  const int n = static_cast<int>(contours.size());
  std::vector<std::vector<int>> mapped;
  for (const auto& g : backward.groups) {
    std::vector<int> m;
    for (int idx : g) m.push_back(n - 1 - idx);
    std::sort(m.begin(), m.end());
    mapped.push_back(m);
  }
  REQUIRE(mapped.size() == forward.groups.size());
  for (size_t gi = 0; gi < mapped.size(); ++gi) {
    std::vector<int> f = forward.groups[gi];
    std::sort(f.begin(), f.end());
    CHECK(mapped[gi] == f);
  }
}

TEST_CASE("degenerate inputs are rejected") {
  Correspondence c;
  c.source = smooth_curve(20);
  c.target = smooth_curve(21);
  CHECK_THROWS_AS(solve_pa(c), InvalidInput);
  c.target.clear();
  for (int i = 0; i < 20; ++i) c.target.emplace_back(1.0, 1.0);
  CHECK_THROWS_AS(solve_mpa(c), DegenerateGeometry);
  CHECK_THROWS_AS(
      divide_into_primitives({circle_contour(3.0, 1.0)}, DivisionParams{}),
      InvalidInput);
}

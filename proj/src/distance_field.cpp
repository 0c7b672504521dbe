#include "primitect/distance_field.hpp"

#include <algorithm>
#include <cmath>

#include "primitect/kdtree.hpp"

namespace primitect {

DistanceField build_distance_field(const PointCloud& pc, double voxel, double pad) {
  if (pc.empty()) throw InvalidInput("distance field: empty point cloud");
  Point3 lo = pc.front(), hi = pc.front();
  for (const Point3& p : pc) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo.array() -= pad;
  hi.array() += pad;

  DistanceField f;
  f.voxel = voxel;
  f.origin = lo;
  f.nx = std::max(2, static_cast<int>(std::ceil((hi.x() - lo.x()) / voxel)) + 1);
  f.ny = std::max(2, static_cast<int>(std::ceil((hi.y() - lo.y()) / voxel)) + 1);
  f.nz = std::max(2, static_cast<int>(std::ceil((hi.z() - lo.z()) / voxel)) + 1);
  f.values.resize(static_cast<size_t>(f.nx) * f.ny * f.nz);

  const KdTree3 tree(pc);
  size_t idx = 0;
  for (int k = 0; k < f.nz; ++k) {
    for (int j = 0; j < f.ny; ++j) {
      for (int i = 0; i < f.nx; ++i) {
        f.values[idx++] = tree.nearest_distance(f.center(i, j, k));
      }
    }
  }
  return f;
}

namespace {

double interpolate(const DistanceField& f, const Point3& q, bool* clamped) {
  // Continuous cell coordinates relative to voxel-center lattice.
  Point3 u = (q - f.origin) / f.voxel - Point3(0.5, 0.5, 0.5);
  const Point3 max_u(f.nx - 1.0, f.ny - 1.0, f.nz - 1.0);
  for (int a = 0; a < 3; ++a) {
    if (u[a] < 0.0 || u[a] > max_u[a]) {
      if (clamped) *clamped = true;
      u[a] = std::clamp(u[a], 0.0, max_u[a]);
    }
  }
  const int i0 = std::min(static_cast<int>(u.x()), f.nx - 2);
  const int j0 = std::min(static_cast<int>(u.y()), f.ny - 2);
  const int k0 = std::min(static_cast<int>(u.z()), f.nz - 2);
  const double fx = u.x() - i0, fy = u.y() - j0, fz = u.z() - k0;

  double acc = 0.0;
  for (int dk = 0; dk < 2; ++dk) {
    const double wz = dk ? fz : 1.0 - fz;
    for (int dj = 0; dj < 2; ++dj) {
      const double wy = dj ? fy : 1.0 - fy;
      for (int di = 0; di < 2; ++di) {
        const double wx = di ? fx : 1.0 - fx;
        acc += wx * wy * wz * f.at(i0 + di, j0 + dj, k0 + dk);
      }
    }
  }
  return acc;
}

}  // namespace

FieldSample field_sample(const DistanceField& f, const Point3& q) {
  FieldSample s;
  s.value = interpolate(f, q, &s.clamped);
  // Within a cell the interpolant is linear per axis, so a small central
  // difference recovers its gradient exactly.
  const double h = 1e-4 * f.voxel;
  for (int a = 0; a < 3; ++a) {
    Point3 qp = q, qm = q;
    qp[a] += h;
    qm[a] -= h;
    s.gradient[a] = (interpolate(f, qp, nullptr) - interpolate(f, qm, nullptr)) / (2.0 * h);
  }
  return s;
}

}  // namespace primitect

#include "primitect/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "primitect/lm.hpp"

namespace primitect {

PrimitiveKind kind_of(const PrimitiveParams& p) {
  return static_cast<PrimitiveKind>(p.index());
}

std::string kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Hemisphere: return "hemisphere";
    case PrimitiveKind::Cone: return "cone";
    case PrimitiveKind::Cylinder: return "cylinder";
    case PrimitiveKind::Polyhedron: return "polyhedron";
  }
  return "unknown";
}

namespace {

// Lateral rings plus fan caps; caps fan from a ring vertex so every vertex
// stays on the parametric surface.
struct RevolveBuilder {
  DiscretizedPrimitive mesh;
  int na = 0;

  void add_ring(const Point3& axis_base, double radius, double z) {
    for (int i = 0; i < na; ++i) {
      const double ang = 2.0 * std::numbers::pi * i / na;
      mesh.vertices.push_back(axis_base +
                              Point3(radius * std::cos(ang), radius * std::sin(ang), z));
    }
  }
  int ring_start(int j) const { return j * na; }

  void connect_rings(int j0, int j1) {
    for (int i = 0; i < na; ++i) {
      const int i2 = (i + 1) % na;
      const int a = ring_start(j0) + i, b = ring_start(j0) + i2;
      const int c = ring_start(j1) + i, d = ring_start(j1) + i2;
      mesh.faces.push_back({a, b, d});
      mesh.faces.push_back({a, d, c});
    }
  }
  void fan_to_apex(int j, int apex, bool upward) {
    for (int i = 0; i < na; ++i) {
      const int i2 = (i + 1) % na;
      if (upward) {
        mesh.faces.push_back({ring_start(j) + i, ring_start(j) + i2, apex});
      } else {
        mesh.faces.push_back({ring_start(j) + i2, ring_start(j) + i, apex});
      }
    }
  }
  void cap_fan(int j, bool upward) {
    const int s = ring_start(j);
    for (int i = 1; i + 1 < na; ++i) {
      if (upward) {
        mesh.faces.push_back({s, s + i, s + i + 1});
      } else {
        mesh.faces.push_back({s, s + i + 1, s + i});
      }
    }
  }
};

DiscretizedPrimitive discretize_hemisphere(const Hemisphere& h, int res) {
  if (h.radius <= 0.0) throw InvalidInput("hemisphere radius must be positive");
  RevolveBuilder b;
  b.na = res;
  const int nv = std::max(2, res / 2);
  for (int j = 0; j < nv; ++j) {
    const double phi = 0.5 * std::numbers::pi * j / nv;
    b.add_ring(h.center, h.radius * std::cos(phi), h.radius * std::sin(phi));
  }
  const int apex = static_cast<int>(b.mesh.vertices.size());
  b.mesh.vertices.push_back(h.center + Point3(0, 0, h.radius));
  for (int j = 0; j + 1 < nv; ++j) b.connect_rings(j, j + 1);
  b.fan_to_apex(nv - 1, apex, true);
  b.cap_fan(0, false);
  return std::move(b.mesh);
}

DiscretizedPrimitive discretize_cone(const Cone& c, int res) {
  if (c.a == 0.0 || -c.b / c.a <= 0.0) {
    throw InvalidInput("cone facade must open downward from a positive apex");
  }
  RevolveBuilder b;
  b.na = res;
  const int nv = std::max(2, res / 2);
  for (int j = 0; j < nv; ++j) {
    const double z = c.b * j / nv;
    const double r = std::sqrt((z - c.b) / c.a);
    b.add_ring(c.base_center, r, z);
  }
  const int apex = static_cast<int>(b.mesh.vertices.size());
  b.mesh.vertices.push_back(c.base_center + Point3(0, 0, c.b));
  for (int j = 0; j + 1 < nv; ++j) b.connect_rings(j, j + 1);
  b.fan_to_apex(nv - 1, apex, true);
  b.cap_fan(0, false);
  return std::move(b.mesh);
}

DiscretizedPrimitive discretize_cylinder(const Cylinder& c, int res) {
  if (c.base_radius <= 0.0 || c.height <= 0.0) {
    throw InvalidInput("cylinder radius and height must be positive");
  }
  RevolveBuilder b;
  b.na = res;
  const int nv = std::max(2, res / 2);
  for (int j = 0; j <= nv; ++j) {
    b.add_ring(c.base_center, c.base_radius, c.height * j / nv);
  }
  for (int j = 0; j < nv; ++j) b.connect_rings(j, j + 1);
  b.cap_fan(0, false);
  b.cap_fan(nv, true);
  return std::move(b.mesh);
}

DiscretizedPrimitive discretize_polyhedron(const Polyhedron& p, int res) {
  const size_t m = p.bottom_chain.size();
  if (m < 3 || p.top_chain.size() != m) {
    throw InvalidInput("polyhedron chains must match and have >= 3 corners");
  }
  if (p.top_z <= p.base_z) throw InvalidInput("polyhedron top must be above base");
  const int levels = std::max(1, res / 8);
  DiscretizedPrimitive mesh;
  for (int j = 0; j <= levels; ++j) {
    const double s = static_cast<double>(j) / levels;
    const double z = p.base_z + s * (p.top_z - p.base_z);
    for (size_t i = 0; i < m; ++i) {
      const Point2 xy = (1.0 - s) * p.bottom_chain[i] + s * p.top_chain[i];
      mesh.vertices.emplace_back(xy.x(), xy.y(), z);
    }
  }
  auto vid = [&](int j, size_t i) { return static_cast<int>(j * m + i % m); };
  for (int j = 0; j < levels; ++j) {
    for (size_t i = 0; i < m; ++i) {
      mesh.faces.push_back({vid(j, i), vid(j, i + 1), vid(j + 1, i + 1)});
      mesh.faces.push_back({vid(j, i), vid(j + 1, i + 1), vid(j + 1, i)});
    }
  }
  for (size_t i = 1; i + 1 < m; ++i) {  // caps fanned from corner 0
    mesh.faces.push_back({vid(0, 0), vid(0, i + 1), vid(0, i)});
    mesh.faces.push_back({vid(levels, 0), vid(levels, i), vid(levels, i + 1)});
  }
  return mesh;
}

}  // namespace

DiscretizedPrimitive discretize(const PrimitiveParams& p, int res) {
  if (res < 8) throw InvalidInput("discretize needs res >= 8");
  return std::visit(
      [res](const auto& prim) {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Hemisphere>) return discretize_hemisphere(prim, res);
        else if constexpr (std::is_same_v<T, Cone>) return discretize_cone(prim, res);
        else if constexpr (std::is_same_v<T, Cylinder>) return discretize_cylinder(prim, res);
        else return discretize_polyhedron(prim, res);
      },
      p);
}

double surface_rms(const PosedPrimitive& p, const DistanceField& f, int res) {
  const DiscretizedPrimitive mesh = discretize(p.params, res);
  double acc = 0.0;
  for (const Point3& v : mesh.vertices) {
    const double d = field_sample(f, p.to_world(v)).value;
    acc += d * d;
  }
  return std::sqrt(acc / mesh.vertices.size());
}

namespace {

struct CloudStats {
  Point2 centroid_xy = Point2::Zero();
  double zmin = 0.0, zmax = 0.0;
  double mean_r = 0.0;  // mean horizontal distance to the vertical axis
  double r_hi = 0.0;    // 95th percentile of horizontal distance
};

CloudStats cloud_stats(const PointCloud& pc) {
  CloudStats s;
  s.zmin = s.zmax = pc.front().z();
  for (const Point3& p : pc) {
    s.centroid_xy += p.head<2>();
    s.zmin = std::min(s.zmin, p.z());
    s.zmax = std::max(s.zmax, p.z());
  }
  s.centroid_xy /= static_cast<double>(pc.size());
  std::vector<double> radii;
  radii.reserve(pc.size());
  for (const Point3& p : pc) {
    radii.push_back((p.head<2>() - s.centroid_xy).norm());
  }
  s.mean_r = std::accumulate(radii.begin(), radii.end(), 0.0) / radii.size();
  std::nth_element(radii.begin(), radii.begin() + radii.size() * 95 / 100, radii.end());
  s.r_hi = radii[radii.size() * 95 / 100];
  return s;
}

// Closest-point distance to a triangle (Ericson, Real-Time Collision
// Detection, 5.1.5).
double point_triangle_dist(const Point3& p, const Point3& a, const Point3& b,
                           const Point3& c) {
  const Point3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Point3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return (p - (a + ab * (d1 / (d1 - d3)))).norm();
  }
  const Point3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return (p - (a + ac * (d2 / (d2 - d6)))).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return (p - (b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

PrimitiveParams params_from_vector(PrimitiveKind kind, const Eigen::VectorXd& x) {
  switch (kind) {
    case PrimitiveKind::Hemisphere:
      return Hemisphere{Point3::Zero(), std::abs(x[3])};
    case PrimitiveKind::Cone: {
      const double r = std::abs(x[3]), b = std::abs(x[4]);
      return Cone{Point3::Zero(), r, -b / (r * r), b};
    }
    case PrimitiveKind::Cylinder:
      return Cylinder{Point3::Zero(), std::abs(x[3]), std::abs(x[4])};
    default:
      throw InvalidInput("only simple primitives are fitted parametrically");
  }
}

// Symmetric objective: field values at the posed discretized surface pull
// the model onto the data, and point-to-mesh distances for a data subsample
// stop the surface from collapsing onto a thin sliver of the cloud.
// Translation plus canonical shape parameters are packed into one vector,
// Jacobian by forward differences.
class PrimitiveFitProblem : public LeastSquaresProblem {
 public:
  PrimitiveFitProblem(PrimitiveKind kind, const PointCloud& pc,
                      const DistanceField& f, int res)
      : kind_(kind), field_(f), res_(res) {
    Eigen::VectorXd probe = Eigen::VectorXd::Ones(5);
    n_surface_ =
        static_cast<int>(discretize(params_from_vector(kind_, probe), res_).vertices.size());
    const size_t stride = std::max<size_t>(1, pc.size() / 150);
    for (size_t i = 0; i < pc.size(); i += stride) data_.push_back(pc[i]);
    n_residuals_ = n_surface_ + static_cast<int>(data_.size());
  }

  int num_params() const override {
    return kind_ == PrimitiveKind::Hemisphere ? 4 : 5;
  }
  int num_residuals() const override { return n_residuals_; }

  void eval(const Eigen::VectorXd& x, Eigen::VectorXd& r,
            std::vector<Eigen::Triplet<double>>* jac) const override {
    residuals(x, r);
    if (!jac) return;
    jac->clear();
    for (int c = 0; c < num_params(); ++c) {
      const double h = 1e-4 * std::max(1.0, std::abs(x[c]));
      Eigen::VectorXd xp = x;
      xp[c] += h;
      Eigen::VectorXd rp(n_residuals_);
      residuals(xp, rp);
      for (int row = 0; row < n_residuals_; ++row) {
        jac->emplace_back(row, c, (rp[row] - r[row]) / h);
      }
    }
  }

 private:
  void residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    Eigen::VectorXd padded = Eigen::VectorXd::Ones(5);
    padded.head(x.size()) = x;
    const DiscretizedPrimitive mesh =
        discretize(params_from_vector(kind_, padded), res_);
    const Point3 t(x[0], x[1], x[2]);
    r.resize(n_residuals_);
    for (int i = 0; i < n_surface_; ++i) {
      r[i] = field_sample(field_, mesh.vertices[i] + t).value;
    }
    for (size_t i = 0; i < data_.size(); ++i) {
      const Point3 p = data_[i] - t;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& f : mesh.faces) {
        best = std::min(best,
                        point_triangle_dist(p, mesh.vertices[f[0]],
                                            mesh.vertices[f[1]],
                                            mesh.vertices[f[2]]));
      }
      r[n_surface_ + i] = best;
    }
  }

  PrimitiveKind kind_;
  const DistanceField& field_;
  int res_;
  int n_surface_ = 0;
  int n_residuals_ = 0;
  std::vector<Point3> data_;
};

}  // namespace

FitResult fit_primitive(const PointCloud& pc, PrimitiveKind kind,
                        const DistanceField& f) {
  if (pc.empty()) throw InvalidInput("fit_primitive: empty point cloud");
  const CloudStats s = cloud_stats(pc);
  const double extent = std::max(s.zmax - s.zmin, 0.1);

  Eigen::VectorXd x;
  switch (kind) {
    case PrimitiveKind::Hemisphere:
      x.resize(4);
      x << s.centroid_xy.x(), s.centroid_xy.y(), s.zmin,
          std::max(extent, s.mean_r);
      break;
    case PrimitiveKind::Cone:
      x.resize(5);
      x << s.centroid_xy.x(), s.centroid_xy.y(), s.zmin, std::max(s.r_hi, 0.1),
          extent;
      break;
    case PrimitiveKind::Cylinder:
      x.resize(5);
      x << s.centroid_xy.x(), s.centroid_xy.y(), s.zmin,
          std::max(s.mean_r, 0.1), extent;
      break;
    default:
      throw InvalidInput("fit_primitive handles simple primitives only");
  }

  const int res = 16;
  PrimitiveFitProblem problem(kind, pc, f, res);
  LMSettings settings;
  settings.max_iter = 60;
  const LMReport report = solve_least_squares(problem, x, settings);

  FitResult out;
  out.primitive.params = params_from_vector(kind, x.size() == 5 ? x : [&] {
    Eigen::VectorXd p = Eigen::VectorXd::Ones(5);
    p.head(4) = x;
    return p;
  }());
  out.primitive.translation = Point3(x[0], x[1], x[2]);
  out.converged = report.converged && !report.stalled;
  Eigen::VectorXd r;
  problem.eval(x, r, nullptr);
  out.rms = std::sqrt(r.squaredNorm() / r.size());
  return out;
}

Polyhedron polyhedron_fallback(const std::vector<Polygon>& unit_contours,
                               int max_corners) {
  if (unit_contours.empty()) throw InvalidInput("fallback needs contours");
  const Polygon* bottom = &unit_contours.front();
  const Polygon* top = &unit_contours.front();
  for (const Polygon& c : unit_contours) {
    if (c.elevation < bottom->elevation) bottom = &c;
    if (c.elevation > top->elevation) top = &c;
  }
  if (bottom->vertices.size() < 3) throw DegenerateGeometry("degenerate bottom contour");

  // Douglas-Peucker on the closed chain: anchor at the two farthest-apart
  // vertices, simplify both halves, binary-search the tolerance down to the
  // corner budget.
  const auto& v = bottom->vertices;
  const size_t n = v.size();
  size_t a0 = 0, a1 = n / 2;
  double best = -1.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = (v[i] - v[0]).norm();
    if (d > best) {
      best = d;
      a1 = i;
    }
  }

  auto dp_open = [&](size_t lo, size_t hi, double eps, auto&& self,
                     std::vector<size_t>& keep) -> void {
    // Chain from lo to hi (cyclic); keep interior points beyond eps.
    const size_t span = (hi + n - lo) % n;
    if (span < 2) return;
    const Point2& pa = v[lo];
    const Point2& pb = v[hi];
    double dmax = -1.0;
    size_t imax = lo;
    for (size_t s = 1; s < span; ++s) {
      const size_t i = (lo + s) % n;
      const Point2 ab = pb - pa;
      const double len = ab.norm();
      double d;
      if (len < 1e-12) {
        d = (v[i] - pa).norm();
      } else {
        const double cross = ab.x() * (v[i].y() - pa.y()) - ab.y() * (v[i].x() - pa.x());
        d = std::abs(cross) / len;
      }
      if (d > dmax) {
        dmax = d;
        imax = i;
      }
    }
    if (dmax > eps) {
      self(lo, imax, eps, self, keep);
      keep.push_back(imax);
      self(imax, hi, eps, self, keep);
    }
  };

  auto simplify = [&](double eps) {
    std::vector<size_t> keep{a0, a1};
    dp_open(a0, a1, eps, dp_open, keep);
    dp_open(a1, a0, eps, dp_open, keep);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    return keep;
  };

  double eps = 1e-6 * std::max(best, 1.0);
  std::vector<size_t> keep = simplify(eps);
  while (static_cast<int>(keep.size()) > max_corners) {
    eps *= 1.5;
    keep = simplify(eps);
  }
  if (keep.size() < 3) {
    // Over-simplified; back off until a valid polygon remains.
    while (keep.size() < 3 && eps > 1e-9) {
      eps /= 2.0;
      keep = simplify(eps);
    }
    if (keep.size() < 3) throw DegenerateGeometry("fallback collapsed the contour");
  }

  Polyhedron poly;
  for (size_t i : keep) poly.bottom_chain.push_back(v[i]);
  poly.top_chain = poly.bottom_chain;
  poly.base_z = bottom->elevation;
  poly.top_z = std::max(top->elevation, bottom->elevation + 1e-6);
  if (poly.top_z <= poly.base_z) poly.top_z = poly.base_z + 1.0;
  return poly;
}

FitResult select_primitive(const PointCloud& pc,
                           const std::vector<Polygon>& unit_contours,
                           const DistanceField& f, const SelectionParams& params) {
  FitResult best;
  best.rms = std::numeric_limits<double>::infinity();
  for (PrimitiveKind kind :
       {PrimitiveKind::Cone, PrimitiveKind::Hemisphere, PrimitiveKind::Cylinder}) {
    try {
      FitResult r = fit_primitive(pc, kind, f);
      if (r.rms < best.rms) best = std::move(r);
    } catch (const std::runtime_error&) {
      // A kind that cannot be evaluated just drops out of the race.
    }
  }
  if (std::isfinite(best.rms) && best.rms <= params.accept_rms) return best;

  FitResult fallback;
  fallback.primitive.params =
      polyhedron_fallback(unit_contours, params.fallback_max_corners);
  fallback.rms = surface_rms(fallback.primitive, f, params.discretize_res);
  fallback.converged = true;
  return fallback;
}

}  // namespace primitect

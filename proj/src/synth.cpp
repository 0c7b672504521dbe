#include "primitect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace primitect {

const char* deformation_name(DeformationLevel level) {
  switch (level) {
    case DeformationLevel::Small: return "small";
    case DeformationLevel::Medium: return "medium";
    default: return "heavy";
  }
}

double deformation_magnitude(DeformationLevel level) {
  switch (level) {
    case DeformationLevel::Small: return 0.2;
    case DeformationLevel::Medium: return 0.6;
    default: return 1.2;
  }
}

namespace {

// Per-meter step of the in-plane affine random walk along the node column;
// the blended field relates neighboring contours by a z-varying affinity,
// which a similarity-only alignment cannot absorb.
double shear_step(DeformationLevel level) {
  switch (level) {
    case DeformationLevel::Small: return 0.012;
    case DeformationLevel::Medium: return 0.035;
    default: return 0.055;
  }
}

constexpr int kCircleSamples = 96;
constexpr double kPi = std::numbers::pi;

// Cross-section of one stacked slice as a function of absolute elevation.
struct Slice {
  PrimitiveParams params;  // canonical, base at z = 0
  double base = 0.0;       // m
  double top = 0.0;        // m
  bool circular = false;

  std::vector<Point2> section(double z) const {
    const double h = z - base;
    std::vector<Point2> pts;
    if (const auto* cyl = std::get_if<Cylinder>(&params)) {
      pts = circle_points(cyl->base_radius);
    } else if (const auto* cone = std::get_if<Cone>(&params)) {
      const double r = std::sqrt(std::max(0.0, (h - cone->b) / cone->a));
      pts = circle_points(r);
    } else if (const auto* hemi = std::get_if<Hemisphere>(&params)) {
      const double r =
          std::sqrt(std::max(0.0, hemi->radius * hemi->radius - h * h));
      pts = circle_points(r);
    } else {
      pts = std::get<Polyhedron>(params).bottom_chain;
    }
    return pts;
  }

  static std::vector<Point2> circle_points(double r) {
    std::vector<Point2> pts;
    pts.reserve(kCircleSamples);
    for (int i = 0; i < kCircleSamples; ++i) {
      const double a = 2.0 * kPi * i / kCircleSamples;
      pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    return pts;
  }
};

std::vector<Point2> regular_polygon(int m, double circumradius, double phase) {
  std::vector<Point2> pts;
  pts.reserve(m);
  for (int i = 0; i < m; ++i) {
    const double a = phase + 2.0 * kPi * i / m;
    pts.emplace_back(circumradius * std::cos(a), circumradius * std::sin(a));
  }
  return pts;
}

std::vector<Point2> rectangle(double half_x, double half_y, double phase) {
  const double c = std::cos(phase), s = std::sin(phase);
  std::vector<Point2> pts;
  for (const auto& [x, y] : {std::pair{half_x, half_y}, {-half_x, half_y},
                             {-half_x, -half_y}, {half_x, -half_y}}) {
    pts.emplace_back(c * x - s * y, s * x + c * y);
  }
  return pts;
}

EDGraph make_warp_column(double height, DeformationLevel level,
                         std::mt19937& rng) {
  const double tmax = deformation_magnitude(level);
  const double sstep = shear_step(level);
  std::uniform_real_distribution<double> ut(-tmax / 3.0, tmax / 3.0);
  std::uniform_real_distribution<double> us(-sstep, sstep);

  // Random walks along z keep the field smooth within one contour while
  // still drifting between neighboring levels.
  const int levels = static_cast<int>(std::ceil(height)) + 1;
  std::vector<std::array<double, 4>> shear(levels);
  std::vector<Point2> trans(levels);
  std::array<double, 4> s{0, 0, 0, 0};
  Point2 t = Point2::Zero();
  double tpeak = 0.0;
  for (int l = 0; l < levels; ++l) {
    for (double& e : s) e = std::clamp(e + us(rng), -3.0 * sstep, 3.0 * sstep);
    t += Point2(ut(rng), ut(rng));
    shear[l] = s;
    trans[l] = t;
    tpeak = std::max(tpeak, t.norm());
  }
  // Rescale the translation walk so the level's magnitude is actually hit.
  const double tscale = tpeak > 1e-12 ? tmax / tpeak : 0.0;

  EDGraph g;
  g.k = 4;
  for (int l = 0; l < levels; ++l) {
    EDNode node;
    node.b = Point3(0.0, 0.0, static_cast<double>(l));
    // In-plane affine only: elevations stay fixed so contour levels and
    // slice labels survive the warp.
    node.A = Mat3::Identity();
    node.A(0, 0) += shear[l][0];
    node.A(0, 1) += shear[l][1];
    node.A(1, 0) += shear[l][2];
    node.A(1, 1) += shear[l][3];
    node.t = Point3(tscale * trans[l].x(), tscale * trans[l].y(), 0.0);
    g.nodes.push_back(node);
  }
  return g;
}

Point2 warp_xy(const EDGraph& g, const Point2& p, double z) {
  const Point3 q = warp_point(g, Point3(p.x(), p.y(), z));
  return Point2(q.x(), q.y());
}

}  // namespace

GeneratedScene generate_building(const TrialConfig& cfg, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // Four slices with alternating circular / polygonal cross-sections, so
  // every junction changes the section shape and carries a residual signal.
  const bool start_circular = u01(rng) < 0.5;
  const bool hemisphere_top = !start_circular && u01(rng) < 0.5;

  SyntheticBuilding building;
  std::vector<Slice> slices;
  double base = 0.0;
  for (int i = 0; i < 4; ++i) {
    const bool circular = (i % 2 == 0) == start_circular;
    Slice s;
    s.base = base;
    s.circular = circular;
    double h = 0.0;
    if (circular && i == 3 && hemisphere_top) {
      const double r = 3.2 + 0.5 * u01(rng);
      h = r;
      s.params = Hemisphere{Point3::Zero(), r};
    } else if (circular) {
      h = 5.0 + 2.4 * u01(rng);
      const double r0 = 2.8 + 0.8 * u01(rng);
      if (u01(rng) < 0.5) {
        s.params = Cylinder{Point3::Zero(), r0, h};
      } else {
        // Gentle taper to r1 (sections stay comparable in size): apex b
        // above base, section radius r0*sqrt(1 - h/b).
        const double r1 = r0 * (0.8 + 0.12 * u01(rng));
        const double b = h / (1.0 - (r1 / r0) * (r1 / r0));
        s.params = Cone{Point3::Zero(), r0, -b / (r0 * r0), b};
      }
    } else {
      h = 5.0 + 2.4 * u01(rng);
      const double phase = 2.0 * kPi * u01(rng);
      std::vector<Point2> chain;
      const double r = 3.0 + 0.8 * u01(rng);
      if (u01(rng) < 0.5) {
        chain = regular_polygon(4, r, phase);
      } else {
        chain = rectangle(r, r / (1.3 + 0.7 * u01(rng)), phase);
      }
      Polyhedron poly;
      poly.bottom_chain = chain;
      poly.top_chain = chain;
      poly.base_z = 0.0;
      poly.top_z = h;
      s.params = poly;
    }
    s.top = base + h;
    base = s.top;
    building.primitives.push_back(s.params);
    building.slice_base.push_back(s.base);
    building.slice_top.push_back(s.top);
    slices.push_back(std::move(s));
  }
  const double height = base;

  building.applied_deformation = make_warp_column(height, cfg.deformation, rng);
  const EDGraph& warp = building.applied_deformation;

  const double noise_std = cfg.sigma * cfg.sigma_scale;
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  auto jitter = [&](const Point2& p) {
    if (noise_std <= 0.0) return p;
    return Point2(p.x() + noise(rng), p.y() + noise(rng));
  };

  GeneratedScene scene;
  for (size_t si = 0; si < slices.size(); ++si) {
    const Slice& s = slices[si];
    // Hemisphere contours stop before the apex where sections collapse.
    double zmax = s.top - 1e-9;
    if (std::holds_alternative<Hemisphere>(s.params)) {
      const double r = std::get<Hemisphere>(s.params).radius;
      zmax = std::min(zmax, s.base + 0.8 * r);
    }
    const int k0 = static_cast<int>(std::ceil(s.base - 1e-9));
    for (int k = std::max(1, k0); k <= static_cast<int>(std::floor(zmax)); ++k) {
      const double z = static_cast<double>(k);
      if (z < s.base) continue;
      Polygon contour;
      contour.elevation = z;
      for (const Point2& p : s.section(z)) {
        contour.vertices.push_back(jitter(warp_xy(warp, p, z)));
      }
      scene.contours.push_back(std::move(contour));
      building.contour_labels.push_back(static_cast<int>(si));
    }
    // Surface cloud: denser vertical sweep of the same sections.
    for (double z = s.base + 0.25; z < zmax; z += 0.5) {
      for (const Point2& p : s.section(z)) {
        const Point2 w = warp_xy(warp, p, z);
        scene.cloud.emplace_back(w.x(), w.y(), z);
      }
    }
  }
  scene.building = std::move(building);
  return scene;
}

bool division_matches_labels(const PrimitiveDivision& division,
                             const std::vector<int>& labels) {
  std::vector<int> grouped(labels.size(), -1);
  int gid = 0;
  for (const auto& group : division.groups) {
    for (int idx : group) {
      if (idx < 0 || idx >= static_cast<int>(labels.size())) return false;
      grouped[idx] = gid;
    }
    ++gid;
  }
  // Same partition iff the two labelings induce identical cut positions over
  // the elevation order (labels are already elevation-ascending).
  for (size_t i = 0; i + 1 < labels.size(); ++i) {
    const bool label_cut = labels[i] != labels[i + 1];
    const bool group_cut = grouped[i] != grouped[i + 1];
    if (label_cut != group_cut) return false;
  }
  return true;
}

MonteCarloGrid run_monte_carlo(const TrialConfig& cfg,
                               const std::vector<double>& sigmas,
                               const std::vector<DeformationLevel>& levels) {
  MonteCarloGrid grid;
  grid.sigmas = sigmas;
  grid.levels = levels;
  for (size_t si = 0; si < sigmas.size(); ++si) {
    for (size_t li = 0; li < levels.size(); ++li) {
      MonteCarloCell cell;
      cell.sigma = sigmas[si];
      cell.level = levels[li];
      int pa_ok = 0, mpa_ok = 0;
      for (int trial = 0; trial < cfg.trials; ++trial) {
        TrialConfig tc = cfg;
        tc.sigma = sigmas[si];
        tc.deformation = levels[li];
        std::seed_seq seq{cfg.seed, static_cast<unsigned>(si),
                          static_cast<unsigned>(li),
                          static_cast<unsigned>(trial)};
        std::vector<unsigned> seeds(1);
        seq.generate(seeds.begin(), seeds.end());
        const GeneratedScene scene = generate_building(tc, seeds[0]);

        DivisionParams pa = cfg.division;
        pa.mode = DistanceMode::PA;
        DivisionParams mpa = cfg.division;
        mpa.mode = DistanceMode::MPA;
        if (division_matches_labels(
                divide_into_primitives(scene.contours, pa),
                scene.building.contour_labels)) {
          ++pa_ok;
        }
        if (division_matches_labels(
                divide_into_primitives(scene.contours, mpa),
                scene.building.contour_labels)) {
          ++mpa_ok;
        }
      }
      cell.pa_percent = 100.0 * pa_ok / cfg.trials;
      cell.mpa_percent = 100.0 * mpa_ok / cfg.trials;
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

std::string format_grid(const MonteCarloGrid& grid) {
  std::ostringstream out;
  out << "sigma";
  for (DeformationLevel l : grid.levels) {
    out << "," << deformation_name(l) << "_pa," << deformation_name(l)
        << "_mpa";
  }
  out << "\n";
  char buf[64];
  for (size_t si = 0; si < grid.sigmas.size(); ++si) {
    std::snprintf(buf, sizeof(buf), "%.2f", grid.sigmas[si]);
    out << buf;
    for (size_t li = 0; li < grid.levels.size(); ++li) {
      const MonteCarloCell& c = grid.cells[si * grid.levels.size() + li];
      std::snprintf(buf, sizeof(buf), ",%.2f,%.2f", c.pa_percent,
                    c.mpa_percent);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace primitect

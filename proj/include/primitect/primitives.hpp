#pragma once

#include <array>
#include <string>
#include <variant>

#include "primitect/distance_field.hpp"
#include "primitect/polygon.hpp"
#include "primitect/types.hpp"

namespace primitect {

// Canonical-space primitives, Z pointing upward. The origin sits at the base
// circle center (hemisphere, cone, cylinder) or at the first bottom corner
// (polyhedron); the world placement lives in PosedPrimitive.

struct Hemisphere {
  Point3 center = Point3::Zero();
  double radius = 1.0;
};

/// Facade z = a * (x^2 + y^2) + b; the base circle (z = 0) has radius
/// sqrt(-b / a), the apex sits at z = b.
struct Cone {
  Point3 base_center = Point3::Zero();
  double base_radius = 1.0;
  double a = -1.0;  // 1/m
  double b = 1.0;   // m
};

struct Cylinder {
  Point3 base_center = Point3::Zero();
  double base_radius = 1.0;
  double height = 1.0;
};

/// Prism with identical bottom and top corner chains (chains are initialized
/// identical by construction).
struct Polyhedron {
  std::vector<Point2> bottom_chain;
  std::vector<Point2> top_chain;
  double base_z = 0.0;
  double top_z = 1.0;
};

using PrimitiveParams = std::variant<Hemisphere, Cone, Cylinder, Polyhedron>;

enum class PrimitiveKind { Hemisphere, Cone, Cylinder, Polyhedron };

PrimitiveKind kind_of(const PrimitiveParams& p);
std::string kind_name(PrimitiveKind k);

struct PosedPrimitive {
  PrimitiveParams params;
  Mat3 rotation = Mat3::Identity();
  Point3 translation = Point3::Zero();

  Point3 to_world(const Point3& canonical) const {
    return rotation * canonical + translation;
  }
};

/// Closed triangle mesh sampled on the primitive surface.
struct DiscretizedPrimitive {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> faces;
};

/// Uniform parametric sampling; watertight for every kind. res controls the
/// samples per dimension (around-axis count for revolve surfaces).
DiscretizedPrimitive discretize(const PrimitiveParams& p, int res);

struct FitResult {
  PosedPrimitive primitive;
  double rms = 0.0;  // symmetric rms: surface-to-data and data-to-surface, m
  bool converged = true;
};

/// Fits one simple primitive kind to a unit's segmented points by driving the
/// distance field toward zero over the discretized surface while keeping the
/// data close to the surface (so shapes cannot win by shrinking onto a sliver
/// of the cloud). Initialization comes from cloud statistics; refinement uses
/// the shared LM solver.
FitResult fit_primitive(const PointCloud& pc, PrimitiveKind kind,
                        const DistanceField& f);

/// Bottom contour simplified by Douglas-Peucker to at most max_corners; the
/// top chain repeats the simplified chain at the top elevation.
Polyhedron polyhedron_fallback(const std::vector<Polygon>& unit_contours,
                               int max_corners = 20);

struct SelectionParams {
  double accept_rms = 1.0;  // m
  int discretize_res = 24;
  int fallback_max_corners = 20;
};

/// Tries cone, hemisphere, cylinder; keeps the best fit when its rms passes
/// accept_rms, otherwise builds the polyhedron fallback from the unit's
/// contours.
FitResult select_primitive(const PointCloud& pc,
                           const std::vector<Polygon>& unit_contours,
                           const DistanceField& f, const SelectionParams& params);

/// rms of the field over a posed primitive's discretized vertices.
double surface_rms(const PosedPrimitive& p, const DistanceField& f, int res);

}  // namespace primitect

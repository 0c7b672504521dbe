#pragma once

#include <iosfwd>
#include <string>

#include "primitect/ed_deform.hpp"
#include "primitect/primitives.hpp"

namespace primitect {

struct BuildingModel {
  std::vector<PosedPrimitive> primitives;
  std::vector<EDGraph> ed_graphs;  // one per primitive
};

struct CompactModel {
  std::vector<BuildingModel> buildings;
  std::string units = "m";
  double contour_interval = 1.0;
  std::string config_hash = "0";
};

/// Versioned structured text; deterministic field order, 1e-4 m precision,
/// at most 2000 nodes per graph. serialize(deserialize(serialize(m))) is a
/// byte-level fixed point.
std::string serialize_model(const CompactModel& m);
CompactModel deserialize_model(const std::string& text);

struct MeshExportStats {
  size_t triangles = 0;
  size_t degenerate_skipped = 0;
};

/// Warps each primitive's discretization through its ED graph and writes
/// ASCII stereolithography, facet normals recomputed from vertices.
std::string export_mesh(const CompactModel& m, int res,
                        MeshExportStats* stats = nullptr);

/// Densely samples the warped model surfaces. Sample sets nest as density
/// grows, so reported distances are monotone in density.
PointCloud sample_model_surface(const CompactModel& m, double density, int res);

struct BuildingAccuracy {
  int id = 0;
  size_t n_points = 0;
  double mean_dist = 0.0;  // m, cloud point to nearest model sample
  size_t compact_bytes = 0;
  size_t mesh_bytes = 0;
  double ratio = 0.0;
};

struct AccuracyReport {
  std::vector<BuildingAccuracy> rows;
};

/// Mean nearest-neighbor distance from each cloud point to a dense surface
/// sampling; one row per building. clouds[i] belongs to buildings[i].
AccuracyReport evaluate_accuracy(const CompactModel& m,
                                 const std::vector<PointCloud>& clouds,
                                 double density, int mesh_res = 40);

double storage_ratio(const CompactModel& m, int res);

/// Delimiter-separated report table (id, n_points, mean_dist_m,
/// compact_bytes, mesh_bytes, ratio).
std::string format_report(const AccuracyReport& report);

}  // namespace primitect

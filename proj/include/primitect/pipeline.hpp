#pragma once

#include <string>

#include "primitect/config.hpp"
#include "primitect/contour_topology.hpp"
#include "primitect/model_io.hpp"
#include "primitect/synth.hpp"

namespace primitect {

// Process exit codes shared by the library and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNonConverged = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitBadConfig = 3;
inline constexpr int kExitNoBuildings = 4;

struct BuildingResult {
  BuildingCluster cluster;
  std::vector<std::vector<int>> unit_groups;  // contour indices per unit
  bool all_converged = true;
};

struct PipelineResult {
  CompactModel model;
  std::vector<BuildingResult> buildings;
  AccuracyReport accuracy;
  double storage_ratio = 0.0;
  bool all_converged = true;
};

/// Full reconstruction in memory: ground filter, raster, contours, nesting,
/// building extraction, primitive division, fitting, ED refinement,
/// evaluation. Throws InvalidInput when no building survives extraction.
PipelineResult run_pipeline(const PointCloud& pc, const PipelineConfig& cfg);

/// Atomic text write (temp file + rename in the target directory).
void write_file_atomic(const std::string& path, const std::string& content);

/// File-level driver: reads the cloud, runs the pipeline, writes model.txt,
/// mesh.stl, report.csv and summary.txt under out_dir. Returns an exit code.
/// stage may stop early: "contours" writes contours.txt only, "divide" adds
/// division.txt; empty means the full run.
int run_pipeline_files(const std::string& input_path,
                       const std::string& config_path,
                       const std::string& out_dir, unsigned seed_override,
                       bool has_seed_override, const std::string& stage,
                       bool verbose);

/// Benchmark driver: Monte Carlo grid over sigma x deformation plus storage
/// and accuracy tables on three curved fixtures; writes grid.csv,
/// storage.csv, accuracy.csv under out_dir.
int run_benchmark_files(const std::string& config_path,
                        const std::string& out_dir, int trials_override,
                        bool verbose);

/// Curved synthetic fixtures for the storage/accuracy study:
/// 0 dome-on-drum, 1 cone stack, 2 deformed polyhedron tower.
CompactModel fixture_model(int which, unsigned seed);

}  // namespace primitect

#pragma once

#include <string>

#include "primitect/contour_topology.hpp"
#include "primitect/ed_deform.hpp"
#include "primitect/primitives.hpp"
#include "primitect/procrustes.hpp"
#include "primitect/synth.hpp"

namespace primitect {

/// Every knob of the pipeline, fully defaulted so an empty config runs.
struct PipelineConfig {
  // [run]
  unsigned seed = 1;

  // [raster]
  double cell_size = 1.0;    // m
  double interval = 1.0;     // m contour gap
  double base_elevation = 0.0;

  // [ground]
  bool ground_filter = true;
  int ground_window = 9;     // cells, odd
  double ground_slope_tol = 0.3;

  // [extract]
  AttributeThresholds thresholds;

  // [division]
  DivisionParams division;

  // [fit]
  double field_voxel = 0.5;  // m
  double field_pad = 2.0;    // m
  SelectionParams selection;

  // [ed]
  int ed_node_count = 80;
  int ed_k = 4;
  EnergyWeights weights;
  // Refinement stops once the per-step relative drop flattens; the graph
  // objective creeps long after the geometry has settled.
  LMSettings lm{.max_iter = 250, .rel_tol = 1e-4};

  // [benchmark]
  int bench_trials = 30;
  double bench_sigma_scale = 0.015;

  // [output]
  int mesh_res = 40;
  double sample_density = 100.0;  // pts/m^2
};

/// INI-style text: [section] headers, key = value lines, '#'/';' comments.
/// Unknown sections or keys are errors; missing ones keep their defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig parse_config_file(const std::string& path);

/// Canonical text with every field in fixed order (also the hash input).
std::string serialize_config(const PipelineConfig& cfg);

/// FNV-1a 64-bit hash of the canonical text, hex-encoded.
std::string config_hash(const PipelineConfig& cfg);

/// Parallelism cap from PRIMITECT_THREADS (>=1), defaulting to the hardware
/// concurrency.
int thread_cap();

}  // namespace primitect

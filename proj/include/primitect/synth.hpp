#pragma once

#include <random>
#include <string>

#include "primitect/ed_deform.hpp"
#include "primitect/primitives.hpp"
#include "primitect/procrustes.hpp"

namespace primitect {

enum class DeformationLevel { Small, Medium, Heavy };

const char* deformation_name(DeformationLevel level);

/// Largest node translation magnitude (m) the generator injects per level.
double deformation_magnitude(DeformationLevel level);

struct TrialConfig {
  double sigma = 0.0;         // noise grid row value (dimensionless)
  double sigma_scale = 0.015;  // m of contour-vertex noise per sigma unit
  DeformationLevel deformation = DeformationLevel::Small;
  int trials = 30;
  unsigned seed = 1;
  DivisionParams division;
};

struct SyntheticBuilding {
  std::vector<PrimitiveParams> primitives;  // canonical stack, bottom first
  std::vector<double> slice_base;           // m, absolute elevation per slice
  std::vector<double> slice_top;            // m
  EDGraph applied_deformation;              // generator warp field
  std::vector<int> contour_labels;          // primitive id per contour
};

struct GeneratedScene {
  SyntheticBuilding building;
  std::vector<Polygon> contours;  // elevation ascending, 1 m gap
  PointCloud cloud;               // deformed surface samples
};

/// Random stack of hemisphere/cone/cylinder/polyhedron slices (20-30 m tall,
/// footprint inside 10x10 m), warped by a random deformation graph and traced
/// into labeled 1 m contours with Gaussian vertex noise. Deterministic in
/// (cfg, seed).
GeneratedScene generate_building(const TrialConfig& cfg, unsigned seed);

/// True when the division's elevation-ordered groups coincide with the
/// maximal constant runs of the ground-truth labels.
bool division_matches_labels(const PrimitiveDivision& division,
                             const std::vector<int>& labels);

struct MonteCarloCell {
  double sigma = 0.0;
  DeformationLevel level = DeformationLevel::Small;
  double pa_percent = 0.0;
  double mpa_percent = 0.0;
};

struct MonteCarloGrid {
  std::vector<double> sigmas;
  std::vector<DeformationLevel> levels;
  std::vector<MonteCarloCell> cells;  // row-major: sigmas x levels
};

/// Runs cfg.trials seeded trials per (sigma, level) cell; a trial counts
/// correct for a distance mode when every contour lands in its labeled group.
MonteCarloGrid run_monte_carlo(const TrialConfig& cfg,
                               const std::vector<double>& sigmas,
                               const std::vector<DeformationLevel>& levels);

/// Delimiter-separated grid: one row per sigma, PA and MPA columns per level.
std::string format_grid(const MonteCarloGrid& grid);

}  // namespace primitect

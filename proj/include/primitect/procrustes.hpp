#pragma once

#include "primitect/polygon.hpp"
#include "primitect/types.hpp"

namespace primitect {

/// Equal-length 2D point correspondence (both sides from resample_closed with
/// the same n).
struct Correspondence {
  std::vector<Point2> source;
  std::vector<Point2> target;
};

struct PAResult {
  SimilarityPose2 pose;
  double residual = 0.0;  // mean per-point distance at the optimum, m
};

struct MPAResult {
  AffinePose2 pose;
  double residual = 0.0;    // mean per-point distance, m
  double normalized = 0.0;  // residual / target area, 1/m
};

/// Similarity alignment (rotation, translation, scale) via centering + SVD.
PAResult solve_pa(const Correspondence& c);

/// Affine alignment in closed form (linear least squares on S, t);
/// normalized distance divides the residual by the target loop area.
MPAResult solve_mpa(const Correspondence& c);

enum class DistanceMode { PA, MPA };

/// Best alignment of two contours over cyclic shifts of the resampled source.
struct ContourMatch {
  double residual = 0.0;    // m
  double normalized = 0.0;  // 1/m, residual over target area
  double scale = 1.0;       // similarity scale (PA) or sqrt|det S| (MPA)
  int shift = 0;
};

ContourMatch match_contours(const Polygon& source, const Polygon& target,
                            int n_resample, DistanceMode mode);

struct DivisionParams {
  int n_resample = 128;
  double d_tilde_max = 0.008;    // 1/m, cut when normalized distance exceeds
  double scale_jump_tol = 0.25;  // |log c| discontinuity marking a junction
  DistanceMode mode = DistanceMode::MPA;
};

/// Partition of a contour chain into maximal runs of mutually similar
/// consecutive contours. groups[i] holds indices into the elevation-sorted
/// contour list.
struct PrimitiveDivision {
  std::vector<std::vector<int>> groups;
  std::vector<int> order;  // elevation-sorted permutation of the input
};

/// Cuts the chain where consecutive contours drift apart in Procrustean
/// space: normalized distance above d_tilde_max, or an isolated jump in the
/// pairwise scale sequence (coaxial surfaces of revolution only differ in
/// radius rate, which the scale-optimizing distance cannot see).
PrimitiveDivision divide_into_primitives(const std::vector<Polygon>& contours,
                                         const DivisionParams& params);

}  // namespace primitect

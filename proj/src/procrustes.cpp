#include "primitect/procrustes.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>

namespace primitect {

namespace {

void require_correspondence(const Correspondence& c) {
  if (c.source.size() != c.target.size()) {
    throw InvalidInput("correspondence lengths differ");
  }
  if (c.source.size() < 8) {
    throw InvalidInput("correspondence needs at least 8 points");
  }
}

struct CenteredStats {
  Point2 mean_src = Point2::Zero();
  Point2 mean_tgt = Point2::Zero();
  Mat2 cov_ts = Mat2::Zero();  // sum of tgt_c * src_c^T
  Mat2 cov_ss = Mat2::Zero();  // sum of src_c * src_c^T
};

CenteredStats accumulate(const std::vector<Point2>& src,
                         const std::vector<Point2>& tgt) {
  CenteredStats s;
  const size_t n = src.size();
  for (size_t i = 0; i < n; ++i) {
    s.mean_src += src[i];
    s.mean_tgt += tgt[i];
  }
  s.mean_src /= static_cast<double>(n);
  s.mean_tgt /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const Point2 a = src[i] - s.mean_src;
    const Point2 b = tgt[i] - s.mean_tgt;
    s.cov_ts += b * a.transpose();
    s.cov_ss += a * a.transpose();
  }
  return s;
}

double mean_distance(const std::vector<Point2>& src,
                     const std::vector<Point2>& tgt,
                     const std::function<Point2(const Point2&)>& map) {
  double acc = 0.0;
  for (size_t i = 0; i < src.size(); ++i) {
    acc += (tgt[i] - map(src[i])).norm();
  }
  return acc / static_cast<double>(src.size());
}

double loop_area(const std::vector<Point2>& pts) {
  double twice = 0.0;
  for (size_t i = 0, n = pts.size(); i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

}  // namespace

PAResult solve_pa(const Correspondence& c) {
  require_correspondence(c);
  const CenteredStats s = accumulate(c.source, c.target);

  const double src_var = s.cov_ss.trace();
  if (src_var < 1e-18) throw DegenerateGeometry("PA: source shape collapsed");

  Eigen::JacobiSVD<Mat2> svd(s.cov_ts, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 1e-12 * std::max(1.0, svd.singularValues()(0))) {
    throw DegenerateGeometry("PA: collinear correspondence");
  }
  Mat2 d = Mat2::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    d(1, 1) = -1.0;
  }

  PAResult r;
  r.pose.R = svd.matrixU() * d * svd.matrixV().transpose();
  r.pose.c = (svd.singularValues().asDiagonal().toDenseMatrix() * d).trace() / src_var;
  if (r.pose.c <= 0.0) throw DegenerateGeometry("PA: non-positive scale");
  r.pose.t = s.mean_tgt - r.pose.c * (r.pose.R * s.mean_src);
  r.residual = mean_distance(c.source, c.target,
                             [&](const Point2& p) { return r.pose.apply(p); });
  return r;
}

MPAResult solve_mpa(const Correspondence& c) {
  require_correspondence(c);
  const CenteredStats s = accumulate(c.source, c.target);

  Eigen::FullPivLU<Mat2> lu(s.cov_ss);
  if (!lu.isInvertible()) throw DegenerateGeometry("MPA: singular normal matrix");

  MPAResult r;
  r.pose.S = s.cov_ts * lu.inverse();
  r.pose.t = s.mean_tgt - r.pose.S * s.mean_src;
  r.residual = mean_distance(c.source, c.target,
                             [&](const Point2& p) { return r.pose.apply(p); });
  const double area = loop_area(c.target);
  if (area <= 0.0) throw DegenerateGeometry("MPA: target loop has zero area");
  r.normalized = r.residual / area;
  return r;
}

ContourMatch match_contours(const Polygon& source, const Polygon& target,
                            int n_resample, DistanceMode mode) {
  Polygon src = source, tgt = target;
  if (polygon_signed_area(src) < 0.0) std::reverse(src.vertices.begin(), src.vertices.end());
  if (polygon_signed_area(tgt) < 0.0) std::reverse(tgt.vertices.begin(), tgt.vertices.end());
  const Polygon rs = resample_closed(src, n_resample);
  const Polygon rt = resample_closed(tgt, n_resample);
  const double tgt_area = polygon_area(tgt);

  ContourMatch best;
  best.residual = std::numeric_limits<double>::infinity();
  Correspondence corr;
  corr.target = rt.vertices;
  corr.source.resize(rs.vertices.size());
  const int n = n_resample;
  for (int shift = 0; shift < n; ++shift) {
    for (int i = 0; i < n; ++i) {
      corr.source[i] = rs.vertices[(i + shift) % n];
    }
    try {
      double residual, scale;
      if (mode == DistanceMode::PA) {
        const PAResult r = solve_pa(corr);
        residual = r.residual;
        scale = r.pose.c;
      } else {
        const MPAResult r = solve_mpa(corr);
        residual = r.residual;
        scale = std::sqrt(std::abs(r.pose.S.determinant()));
      }
      if (residual < best.residual) {
        best.residual = residual;
        best.scale = scale;
        best.shift = shift;
      }
    } catch (const DegenerateGeometry&) {
      // Skip unusable shifts; degenerate shapes fail every shift below.
    }
  }
  if (!std::isfinite(best.residual)) {
    throw DegenerateGeometry("contour match: all shifts degenerate");
  }
  best.normalized = best.residual / tgt_area;
  return best;
}

PrimitiveDivision divide_into_primitives(const std::vector<Polygon>& contours,
                                         const DivisionParams& params) {
  const int n = static_cast<int>(contours.size());
  if (n < 2) throw InvalidInput("primitive division needs at least 2 contours");

  PrimitiveDivision div;
  div.order.resize(n);
  for (int i = 0; i < n; ++i) div.order[i] = i;
  std::stable_sort(div.order.begin(), div.order.end(), [&](int a, int b) {
    return contours[a].elevation < contours[b].elevation;
  });

  // Pairwise matches between elevation-consecutive contours, lower as source.
  std::vector<ContourMatch> pairs(n - 1);
  for (int k = 0; k + 1 < n; ++k) {
    pairs[k] = match_contours(contours[div.order[k]], contours[div.order[k + 1]],
                              params.n_resample, params.mode);
  }

  std::vector<bool> cut(n - 1, false);
  for (int k = 0; k + 1 < n; ++k) {
    if (pairs[k].normalized > params.d_tilde_max) cut[k] = true;
  }
  // A pairwise-scale value that is itself far from 1 and disagrees with both
  // neighboring pairs marks a radius-rate discontinuity between coaxial
  // surfaces of revolution; requiring the jump on the pair itself keeps a
  // benign pair from being cut just because its neighbors are steep.
  for (int k = 0; k + 1 < n; ++k) {
    const double lc = std::log(std::max(pairs[k].scale, 1e-12));
    if (std::abs(lc) <= params.scale_jump_tol) continue;
    bool jump_prev = true, jump_next = true;
    if (k > 0) {
      jump_prev = std::abs(lc - std::log(std::max(pairs[k - 1].scale, 1e-12))) >
                  params.scale_jump_tol;
    }
    if (k + 1 < n - 1) {
      jump_next = std::abs(lc - std::log(std::max(pairs[k + 1].scale, 1e-12))) >
                  params.scale_jump_tol;
    }
    if (k > 0 && k + 1 < n - 1 && jump_prev && jump_next) cut[k] = true;
  }

  std::vector<int> group;
  for (int k = 0; k < n; ++k) {
    group.push_back(div.order[k]);
    if (k == n - 1 || cut[k]) {
      div.groups.push_back(group);
      group.clear();
    }
  }
  return div;
}

}  // namespace primitect

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "primitect/types.hpp"

namespace primitect {

/// Median-split kd-tree over 3D points. Built once, queried read-only.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(const PointCloud& points) : points_(points) {
    index_.resize(points_.size());
    std::iota(index_.begin(), index_.end(), 0);
    if (!index_.empty()) build(0, static_cast<int>(index_.size()), 0);
  }

  bool empty() const { return points_.empty(); }

  /// Index of the nearest point to q.
  int nearest(const Point3& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(0, static_cast<int>(index_.size()), 0, q, best, best_d2);
    return best;
  }

  double nearest_distance(const Point3& q) const {
    const int i = nearest(q);
    return i < 0 ? std::numeric_limits<double>::infinity()
                 : (points_[i] - q).norm();
  }

  /// Indices of the k nearest points, closest first.
  std::vector<int> knearest(const Point3& q, int k) const {
    // max-heap of (distance^2, index)
    std::priority_queue<std::pair<double, int>> heap;
    knn_search(0, static_cast<int>(index_.size()), 0, q, k, heap);
    std::vector<int> out(heap.size());
    std::vector<double> d(heap.size());
    for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

  const Point3& point(int i) const { return points_[i]; }

 private:
  // Nodes are the subarray medians; [lo, hi) with axis cycling per depth.
  void build(int lo, int hi, int depth) {
    if (hi - lo <= 1) return;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search(int lo, int hi, int depth, const Point3& q, int& best,
              double& best_d2) const {
    if (lo >= hi) return;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    const Point3& p = points_[index_[mid]];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = index_[mid];
    }
    const double delta = q[axis] - p[axis];
    const bool go_left_first = delta < 0.0;
    if (go_left_first) {
      search(lo, mid, depth + 1, q, best, best_d2);
      if (delta * delta < best_d2) search(mid + 1, hi, depth + 1, q, best, best_d2);
    } else {
      search(mid + 1, hi, depth + 1, q, best, best_d2);
      if (delta * delta < best_d2) search(lo, mid, depth + 1, q, best, best_d2);
    }
  }

  void knn_search(int lo, int hi, int depth, const Point3& q, int k,
                  std::priority_queue<std::pair<double, int>>& heap) const {
    if (lo >= hi) return;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    const Point3& p = points_[index_[mid]];
    const double d2 = (p - q).squaredNorm();
    if (static_cast<int>(heap.size()) < k) {
      heap.emplace(d2, index_[mid]);
    } else if (d2 < heap.top().first) {
      heap.pop();
      heap.emplace(d2, index_[mid]);
    }
    const double delta = q[axis] - p[axis];
    const bool full = static_cast<int>(heap.size()) >= k;
    const double bound = full ? heap.top().first
                              : std::numeric_limits<double>::infinity();
    if (delta < 0.0) {
      knn_search(lo, mid, depth + 1, q, k, heap);
      const double b2 = full ? heap.top().first : bound;
      if (delta * delta < b2 || static_cast<int>(heap.size()) < k) {
        knn_search(mid + 1, hi, depth + 1, q, k, heap);
      }
    } else {
      knn_search(mid + 1, hi, depth + 1, q, k, heap);
      const double b2 = full ? heap.top().first : bound;
      if (delta * delta < b2 || static_cast<int>(heap.size()) < k) {
        knn_search(lo, mid, depth + 1, q, k, heap);
      }
    }
  }

  PointCloud points_;
  std::vector<int> index_;
};

}  // namespace primitect

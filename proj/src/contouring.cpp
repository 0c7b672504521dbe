#include "primitect/contouring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace primitect {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GridShape {
  Point2 origin;
  double cell;
  int w, h;
};

GridShape grid_for_cloud(const PointCloud& pc, double cell) {
  Point2 lo(kInf, kInf), hi(-kInf, -kInf);
  for (const Point3& p : pc) {
    lo = lo.cwiseMin(p.head<2>());
    hi = hi.cwiseMax(p.head<2>());
  }
  GridShape g;
  g.cell = cell;
  g.origin = Point2(std::floor(lo.x() / cell) * cell, std::floor(lo.y() / cell) * cell);
  g.w = std::max(1, static_cast<int>(std::floor((hi.x() - g.origin.x()) / cell)) + 1);
  g.h = std::max(1, static_cast<int>(std::floor((hi.y() - g.origin.y()) / cell)) + 1);
  return g;
}

int cell_index(const GridShape& g, const Point3& p, int& i, int& j) {
  i = std::clamp(static_cast<int>(std::floor((p.x() - g.origin.x()) / g.cell)), 0, g.w - 1);
  j = std::clamp(static_cast<int>(std::floor((p.y() - g.origin.y()) / g.cell)), 0, g.h - 1);
  return j * g.w + i;
}

}  // namespace

PointCloud morphological_ground_filter(const PointCloud& pc, double cell,
                                       int window, double slope_tol) {
  if (pc.empty()) throw InvalidInput("ground filter: empty point cloud");
  if (window < 3 || window % 2 == 0) {
    throw InvalidInput("ground filter: window must be odd and >= 3");
  }
  const GridShape g = grid_for_cloud(pc, cell);
  const size_t ncell = static_cast<size_t>(g.w) * g.h;
  std::vector<double> minz(ncell, kInf);
  int i, j;
  for (const Point3& p : pc) {
    const int idx = cell_index(g, p, i, j);
    minz[idx] = std::min(minz[idx], p.z());
  }

  const int half = window / 2;
  auto window_op = [&](const std::vector<double>& src, bool take_min) {
    std::vector<double> dst(ncell, kInf);
    for (int cy = 0; cy < g.h; ++cy) {
      for (int cx = 0; cx < g.w; ++cx) {
        double acc = take_min ? kInf : -kInf;
        bool any = false;
        for (int dy = -half; dy <= half; ++dy) {
          const int ny = cy + dy;
          if (ny < 0 || ny >= g.h) continue;
          for (int dx = -half; dx <= half; ++dx) {
            const int nx = cx + dx;
            if (nx < 0 || nx >= g.w) continue;
            const double v = src[ny * g.w + nx];
            if (!std::isfinite(v)) continue;
            acc = take_min ? std::min(acc, v) : std::max(acc, v);
            any = true;
          }
        }
        if (any) dst[cy * g.w + cx] = acc;
      }
    }
    return dst;
  };

  const std::vector<double> opened = window_op(window_op(minz, true), false);
  const double threshold = slope_tol * window * cell;

  PointCloud out;
  for (const Point3& p : pc) {
    const int idx = cell_index(g, p, i, j);
    if (std::isfinite(opened[idx]) && p.z() - opened[idx] > threshold) {
      out.push_back(p);
    }
  }
  return out;
}

RasterDSM rasterize_dsm(const PointCloud& pc, double cell) {
  if (pc.empty()) throw InvalidInput("rasterize: empty point cloud");
  const GridShape g = grid_for_cloud(pc, cell);
  RasterDSM dsm;
  dsm.origin = g.origin;
  dsm.cell_size = cell;
  dsm.width = g.w;
  dsm.height = g.h;
  dsm.z.assign(static_cast<size_t>(g.w) * g.h, 0.0);
  dsm.valid.assign(dsm.z.size(), 0);

  int i, j;
  for (const Point3& p : pc) {
    const int idx = cell_index(g, p, i, j);
    if (!dsm.valid[idx] || p.z() > dsm.z[idx]) {
      dsm.z[idx] = p.z();
      dsm.valid[idx] = 1;
    }
  }

  // Nearest-neighbor fill within 3 cells.
  std::vector<double> filled = dsm.z;
  std::vector<uint8_t> fvalid = dsm.valid;
  for (int cy = 0; cy < g.h; ++cy) {
    for (int cx = 0; cx < g.w; ++cx) {
      if (dsm.valid[cy * g.w + cx]) continue;
      double best_d2 = kInf;
      double best_z = 0.0;
      bool found = false;
      for (int dy = -3; dy <= 3; ++dy) {
        const int ny = cy + dy;
        if (ny < 0 || ny >= g.h) continue;
        for (int dx = -3; dx <= 3; ++dx) {
          const int nx = cx + dx;
          if (nx < 0 || nx >= g.w) continue;
          if (!dsm.valid[ny * g.w + nx]) continue;
          const double d2 = double(dx) * dx + double(dy) * dy;
          if (d2 < best_d2) {
            best_d2 = d2;
            best_z = dsm.z[ny * g.w + nx];
            found = true;
          }
        }
      }
      if (found) {
        filled[cy * g.w + cx] = best_z;
        fvalid[cy * g.w + cx] = 1;
      }
    }
  }
  dsm.z = std::move(filled);
  dsm.valid = std::move(fvalid);
  return dsm;
}

namespace {

// Exact-double key for chaining marching-squares segments; crossing points on
// shared block edges are computed from the same node pair and are bit-equal.
using PtKey = std::pair<double, double>;

PtKey key_of(const Point2& p) { return {p.x(), p.y()}; }

struct SegmentSoup {
  std::vector<std::array<Point2, 2>> segs;
  std::map<PtKey, std::vector<int>> at;

  void add(const Point2& a, const Point2& b) {
    const int id = static_cast<int>(segs.size());
    segs.push_back({a, b});
    at[key_of(a)].push_back(id);
    at[key_of(b)].push_back(id);
  }
};

void simplify_collinear(std::vector<Point2>& v) {
  // Drop consecutive duplicates first.
  std::vector<Point2> tmp;
  for (const Point2& p : v) {
    if (tmp.empty() || (p - tmp.back()).norm() > 1e-12) tmp.push_back(p);
  }
  if (tmp.size() > 1 && (tmp.front() - tmp.back()).norm() <= 1e-12) tmp.pop_back();

  std::vector<Point2> out;
  const size_t n = tmp.size();
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = tmp[(i + n - 1) % n];
    const Point2& b = tmp[i];
    const Point2& c = tmp[(i + 1) % n];
    const Point2 u = b - a, w = c - b;
    const double cross = u.x() * w.y() - u.y() * w.x();
    if (std::abs(cross) > 1e-9 * std::max(1.0, u.norm() * w.norm())) {
      out.push_back(b);
    }
  }
  v = std::move(out);
}

}  // namespace

ContourSet trace_contours(const RasterDSM& dsm, double interval, double base) {
  if (interval <= 0.0) throw InvalidInput("contour interval must be positive");
  ContourSet cs;
  cs.interval = interval;
  cs.base = base;
  if (dsm.width < 2 || dsm.height < 2) return cs;

  double zmin = kInf, zmax = -kInf;
  for (size_t idx = 0; idx < dsm.z.size(); ++idx) {
    if (!dsm.valid[idx]) continue;
    zmin = std::min(zmin, dsm.z[idx]);
    zmax = std::max(zmax, dsm.z[idx]);
  }
  if (!(zmin < zmax)) return cs;

  const int k_lo = static_cast<int>(std::ceil((zmin - base) / interval));
  const int k_hi = static_cast<int>(std::floor((zmax - base) / interval));

  for (int k = k_lo; k <= k_hi; ++k) {
    const double level = base + k * interval;
    // Nodes equal to the level are nudged above it so crossings stay proper.
    auto node = [&](int i, int j) -> double {
      if (!dsm.is_valid(i, j)) return level - 1e6;
      double v = dsm.at(i, j);
      if (v == level) v += 1e-9 * std::max(1.0, std::abs(level));
      return v;
    };
    auto cross_point = [&](int i0, int j0, int i1, int j1) -> Point2 {
      const double va = node(i0, j0), vb = node(i1, j1);
      const double t = (level - va) / (vb - va);
      return dsm.sample_pos(i0, j0) +
             t * (dsm.sample_pos(i1, j1) - dsm.sample_pos(i0, j0));
    };

    SegmentSoup soup;
    for (int j = 0; j + 1 < dsm.height; ++j) {
      for (int i = 0; i + 1 < dsm.width; ++i) {
        const double v00 = node(i, j), v10 = node(i + 1, j);
        const double v01 = node(i, j + 1), v11 = node(i + 1, j + 1);
        int mask = 0;
        if (v00 > level) mask |= 1;
        if (v10 > level) mask |= 2;
        if (v11 > level) mask |= 4;
        if (v01 > level) mask |= 8;
        if (mask == 0 || mask == 15) continue;

        const Point2 bottom = (mask & 1) != ((mask >> 1) & 1)
                                  ? cross_point(i, j, i + 1, j)
                                  : Point2();
        const Point2 right = ((mask >> 1) & 1) != ((mask >> 2) & 1)
                                 ? cross_point(i + 1, j, i + 1, j + 1)
                                 : Point2();
        const Point2 top = ((mask >> 3) & 1) != ((mask >> 2) & 1)
                               ? cross_point(i, j + 1, i + 1, j + 1)
                               : Point2();
        const Point2 left = (mask & 1) != ((mask >> 3) & 1)
                                ? cross_point(i, j, i, j + 1)
                                : Point2();

        switch (mask) {
          case 1: case 14: soup.add(left, bottom); break;
          case 2: case 13: soup.add(bottom, right); break;
          case 4: case 11: soup.add(right, top); break;
          case 8: case 7: soup.add(top, left); break;
          case 3: case 12: soup.add(left, right); break;
          case 6: case 9: soup.add(bottom, top); break;
          case 5: case 10: {
            // Saddle: connect the high corners through the center when the
            // center average is above the level.
            const double avg = 0.25 * (v00 + v10 + v01 + v11);
            const bool high_diag_00 = (mask == 5);
            if ((avg > level) == high_diag_00) {
              soup.add(left, bottom);
              soup.add(right, top);
            } else {
              soup.add(left, top);
              soup.add(bottom, right);
            }
            break;
          }
          default: break;
        }
      }
    }

    // Chain segments into loops; anything that fails to close is dropped.
    std::vector<char> used(soup.segs.size(), 0);
    auto next_seg = [&](const PtKey& key, int exclude) -> int {
      auto it = soup.at.find(key);
      if (it == soup.at.end()) return -1;
      for (int id : it->second) {
        if (!used[id] && id != exclude) return id;
      }
      return -1;
    };
    for (size_t s0 = 0; s0 < soup.segs.size(); ++s0) {
      if (used[s0]) continue;
      std::vector<Point2> chain{soup.segs[s0][0], soup.segs[s0][1]};
      used[s0] = 1;
      bool closed = false;
      while (true) {
        const PtKey tail = key_of(chain.back());
        if (chain.size() > 2 && tail == key_of(chain.front())) {
          closed = true;
          break;
        }
        const int id = next_seg(tail, -1);
        if (id < 0) break;
        used[id] = 1;
        const auto& seg = soup.segs[id];
        chain.push_back(key_of(seg[0]) == tail ? seg[1] : seg[0]);
      }
      if (!closed) continue;
      chain.pop_back();  // duplicate of front
      simplify_collinear(chain);
      if (chain.size() < 3) continue;
      Polygon poly{std::move(chain), level};
      if (polygon_area(poly) <= 0.0) continue;
      if (polygon_signed_area(poly) < 0.0) {
        std::reverse(poly.vertices.begin(), poly.vertices.end());
      }
      cs.contours.push_back(std::move(poly));
    }
  }

  std::stable_sort(cs.contours.begin(), cs.contours.end(),
                   [](const Polygon& a, const Polygon& b) {
                     if (a.elevation != b.elevation) return a.elevation < b.elevation;
                     const Point2 ca = polygon_centroid(a), cb = polygon_centroid(b);
                     if (ca.x() != cb.x()) return ca.x() < cb.x();
                     return ca.y() < cb.y();
                   });
  return cs;
}

}  // namespace primitect

#include "primitect/ed_deform.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "primitect/kdtree.hpp"

namespace primitect {

namespace {

std::vector<Point3> voxel_average(const std::vector<Point3>& pts, double voxel,
                                  const Point3& lo) {
  // Keyed by voxel index so output order is independent of input order.
  std::map<std::array<long long, 3>, std::pair<Point3, int>> cells;
  for (const Point3& p : pts) {
    const std::array<long long, 3> key = {
        static_cast<long long>(std::floor((p.x() - lo.x()) / voxel)),
        static_cast<long long>(std::floor((p.y() - lo.y()) / voxel)),
        static_cast<long long>(std::floor((p.z() - lo.z()) / voxel))};
    auto& [sum, count] = cells[key];
    if (count == 0) sum = Point3::Zero();
    sum += p;
    ++count;
  }
  std::vector<Point3> out;
  out.reserve(cells.size());
  for (const auto& [key, sc] : cells) out.push_back(sc.first / sc.second);
  return out;
}

}  // namespace

void bind_graph(EDGraph& g, const std::vector<Point3>& vertices) {
  PointCloud node_pos;
  node_pos.reserve(g.nodes.size());
  for (const EDNode& n : g.nodes) node_pos.push_back(n.b);
  const KdTree3 tree(node_pos);
  const int k = g.k;

  g.vertex_bindings.clear();
  g.vertex_bindings.reserve(vertices.size());
  for (const Point3& v : vertices) {
    const std::vector<int> nn = tree.knearest(v, k + 1);
    VertexBinding b;
    const double d_max = (node_pos[nn.back()] - v).norm();
    double sum = 0.0;
    const int used = std::min<int>(k, static_cast<int>(nn.size()) - 1);
    for (int j = 0; j < used; ++j) {
      const double d = (node_pos[nn[j]] - v).norm();
      const double w = std::max(0.0, 1.0 - (d_max > 0.0 ? d / d_max : 0.0));
      b.nodes.push_back(nn[j]);
      b.weights.push_back(w);
      sum += w;
    }
    if (sum <= 0.0) {
      for (double& w : b.weights) w = 1.0 / b.weights.size();
    } else {
      for (double& w : b.weights) w /= sum;
    }
    g.vertex_bindings.push_back(std::move(b));
  }

  // Symmetrized k-nearest neighborhood over nodes for the regularizer.
  const int m = static_cast<int>(g.nodes.size());
  g.node_neighbors.assign(m, {});
  for (int i = 0; i < m; ++i) {
    const std::vector<int> nn = tree.knearest(node_pos[i], std::min(k + 1, m));
    for (int j : nn) {
      if (j != i) g.node_neighbors[i].push_back(j);
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j : g.node_neighbors[i]) {
      if (std::find(g.node_neighbors[j].begin(), g.node_neighbors[j].end(), i) ==
          g.node_neighbors[j].end()) {
        g.node_neighbors[j].push_back(i);
      }
    }
  }
  for (auto& nb : g.node_neighbors) std::sort(nb.begin(), nb.end());
}

EDGraph build_graph(const DiscretizedPrimitive& model, int node_count, int k) {
  if (node_count < 8) throw InvalidInput("build_graph needs node_count >= 8");
  if (static_cast<int>(model.vertices.size()) < node_count) {
    throw InvalidInput("model has fewer vertices than requested nodes");
  }

  Point3 lo = model.vertices.front(), hi = model.vertices.front();
  for (const Point3& p : model.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = std::max((hi - lo).norm(), 1e-6);

  // Larger voxels give fewer nodes; bisect to node_count +/- 10%.
  double vlo = diag / 1000.0, vhi = diag;
  std::vector<Point3> nodes;
  for (int it = 0; it < 60; ++it) {
    const double v = 0.5 * (vlo + vhi);
    nodes = voxel_average(model.vertices, v, lo);
    const int n = static_cast<int>(nodes.size());
    if (std::abs(n - node_count) <= std::max(1, node_count / 10)) break;
    if (n > node_count) {
      vlo = v;
    } else {
      vhi = v;
    }
  }

  EDGraph g;
  g.k = k;
  g.nodes.reserve(nodes.size());
  for (const Point3& p : nodes) g.nodes.push_back(EDNode{p, Mat3::Identity(), Point3::Zero()});
  bind_graph(g, model.vertices);
  return g;
}

namespace {

Point3 blend(const EDGraph& g, const VertexBinding& b, const Point3& v) {
  Point3 out = Point3::Zero();
  for (size_t j = 0; j < b.nodes.size(); ++j) {
    const EDNode& n = g.nodes[b.nodes[j]];
    out += b.weights[j] * (n.A * (v - n.b) + n.b + n.t);
  }
  return out;
}

}  // namespace

Point3 warp_vertex(const EDGraph& g, int vertex_index, const Point3& v) {
  if (vertex_index < 0 ||
      vertex_index >= static_cast<int>(g.vertex_bindings.size())) {
    throw InvalidInput("warp_vertex: vertex has no binding");
  }
  return blend(g, g.vertex_bindings[vertex_index], v);
}

Point3 warp_point(const EDGraph& g, const Point3& p) {
  PointCloud node_pos;
  node_pos.reserve(g.nodes.size());
  for (const EDNode& n : g.nodes) node_pos.push_back(n.b);
  const KdTree3 tree(node_pos);
  const std::vector<int> nn =
      tree.knearest(p, std::min<int>(g.k + 1, static_cast<int>(node_pos.size())));
  VertexBinding b;
  const double d_max = (node_pos[nn.back()] - p).norm();
  double sum = 0.0;
  const int used = std::max(1, static_cast<int>(nn.size()) - 1);
  for (int j = 0; j < used; ++j) {
    const double d = (node_pos[nn[j]] - p).norm();
    const double w = std::max(0.0, 1.0 - (d_max > 0.0 ? d / d_max : 0.0));
    b.nodes.push_back(nn[j]);
    b.weights.push_back(w);
    sum += w;
  }
  if (sum <= 0.0) {
    for (double& w : b.weights) w = 1.0 / b.weights.size();
  } else {
    for (double& w : b.weights) w /= sum;
  }
  return blend(g, b, p);
}

double energy_rot(const EDGraph& g) {
  double e = 0.0;
  for (const EDNode& n : g.nodes) {
    const Point3 c1 = n.A.col(0), c2 = n.A.col(1), c3 = n.A.col(2);
    e += std::pow(c1.dot(c2), 2) + std::pow(c1.dot(c3), 2) + std::pow(c2.dot(c3), 2) +
         std::pow(c1.dot(c1) - 1.0, 2) + std::pow(c2.dot(c2) - 1.0, 2) +
         std::pow(c3.dot(c3) - 1.0, 2);
  }
  return e;
}

double energy_reg(const EDGraph& g) {
  double e = 0.0;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const Point3& gi = g.nodes[i].b;
    for (int j : g.node_neighbors[i]) {
      const EDNode& nj = g.nodes[j];
      const Point3 r = nj.A * (gi - nj.b) + nj.b + nj.t - (gi + g.nodes[i].t);
      e += r.squaredNorm();
    }
  }
  return e;
}

double energy_data(const EDGraph& g, const DiscretizedPrimitive& model,
                   const DistanceField& f) {
  if (g.vertex_bindings.size() != model.vertices.size()) {
    throw InvalidInput("energy_data: bindings do not match model");
  }
  double e = 0.0;
  for (size_t i = 0; i < model.vertices.size(); ++i) {
    const double d =
        field_sample(f, warp_vertex(g, static_cast<int>(i), model.vertices[i])).value;
    e += d * d;
  }
  return e;
}

double total_energy(const EDGraph& g, const DiscretizedPrimitive& model,
                    const DistanceField& f, const EnergyWeights& w) {
  return w.w_rot * energy_rot(g) + w.w_reg * energy_reg(g) +
         w.w_data * energy_data(g, model, f);
}

Eigen::VectorXd graph_parameters(const EDGraph& g) {
  Eigen::VectorXd x(12 * g.nodes.size());
  for (size_t j = 0; j < g.nodes.size(); ++j) {
    const EDNode& n = g.nodes[j];
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) x[12 * j + 3 * r + c] = n.A(r, c);
    }
    x.segment<3>(12 * j + 9) = n.t;
  }
  return x;
}

void set_graph_parameters(EDGraph& g, const Eigen::VectorXd& x) {
  for (size_t j = 0; j < g.nodes.size(); ++j) {
    EDNode& n = g.nodes[j];
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) n.A(r, c) = x[12 * j + 3 * r + c];
    }
    n.t = x.segment<3>(12 * j + 9);
  }
}

EDProblem::EDProblem(const EDGraph& g, const DiscretizedPrimitive& model,
                     const DistanceField& f, const EnergyWeights& w)
    : graph_(g), model_(model), field_(f), weights_(w) {
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    for (int j : g.node_neighbors[i]) {
      reg_pairs_.emplace_back(static_cast<int>(i), j);
    }
  }
}

int EDProblem::num_params() const { return 12 * static_cast<int>(graph_.nodes.size()); }

int EDProblem::num_residuals() const {
  return 6 * static_cast<int>(graph_.nodes.size()) +
         3 * static_cast<int>(reg_pairs_.size()) +
         static_cast<int>(model_.vertices.size());
}

void EDProblem::eval(const Eigen::VectorXd& x, Eigen::VectorXd& residuals,
                     std::vector<Eigen::Triplet<double>>* jac) const {
  set_graph_parameters(graph_, x);
  residuals.resize(num_residuals());
  if (jac) jac->clear();

  const double sr = std::sqrt(weights_.w_rot);
  const double sg = std::sqrt(weights_.w_reg);
  const double sd = std::sqrt(weights_.w_data);
  int row = 0;

  // Rotation: six column-product terms per node.
  static const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (size_t j = 0; j < graph_.nodes.size(); ++j) {
    const Mat3& A = graph_.nodes[j].A;
    const int base = static_cast<int>(12 * j);
    for (const auto& pr : pairs) {
      const Point3 ca = A.col(pr[0]), cb = A.col(pr[1]);
      residuals[row] = sr * ca.dot(cb);
      if (jac) {
        for (int r = 0; r < 3; ++r) {
          jac->emplace_back(row, base + 3 * r + pr[0], sr * cb[r]);
          jac->emplace_back(row, base + 3 * r + pr[1], sr * ca[r]);
        }
      }
      ++row;
    }
    for (int c = 0; c < 3; ++c) {
      const Point3 col = A.col(c);
      residuals[row] = sr * (col.dot(col) - 1.0);
      if (jac) {
        for (int r = 0; r < 3; ++r) {
          jac->emplace_back(row, base + 3 * r + c, sr * 2.0 * col[r]);
        }
      }
      ++row;
    }
  }

  // Regularization: neighbor consistency residual per (i, j) pair.
  for (const auto& [i, j] : reg_pairs_) {
    const EDNode& ni = graph_.nodes[i];
    const EDNode& nj = graph_.nodes[j];
    const Point3 d = ni.b - nj.b;
    const Point3 r = sg * (nj.A * d + nj.b + nj.t - ni.b - ni.t);
    residuals.segment<3>(row) = r;
    if (jac) {
      const int bi = 12 * i, bj = 12 * j;
      for (int rr = 0; rr < 3; ++rr) {
        for (int c = 0; c < 3; ++c) {
          jac->emplace_back(row + rr, bj + 3 * rr + c, sg * d[c]);
        }
        jac->emplace_back(row + rr, bj + 9 + rr, sg);
        jac->emplace_back(row + rr, bi + 9 + rr, -sg);
      }
    }
    row += 3;
  }

  // Data: field value at each warped vertex.
  for (size_t vi = 0; vi < model_.vertices.size(); ++vi) {
    const Point3& v = model_.vertices[vi];
    const VertexBinding& b = graph_.vertex_bindings[vi];
    const Point3 warped = blend(graph_, b, v);
    const FieldSample s = field_sample(field_, warped);
    residuals[row] = sd * s.value;
    if (jac) {
      for (size_t j = 0; j < b.nodes.size(); ++j) {
        const EDNode& n = graph_.nodes[b.nodes[j]];
        const Point3 d = v - n.b;
        const double w = b.weights[j];
        const int base = 12 * b.nodes[j];
        for (int rr = 0; rr < 3; ++rr) {
          const double gw = sd * s.gradient[rr] * w;
          for (int c = 0; c < 3; ++c) {
            jac->emplace_back(row, base + 3 * rr + c, gw * d[c]);
          }
          jac->emplace_back(row, base + 9 + rr, gw);
        }
      }
    }
    ++row;
  }
}

bool EDProblem::step_acceptable(const Eigen::VectorXd& x_new) const {
  // Eq-9 style penalties cannot tell reflections apart; keep det(A) positive.
  for (size_t j = 0; j * 12 < static_cast<size_t>(x_new.size()); ++j) {
    Mat3 A;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) A(r, c) = x_new[12 * j + 3 * r + c];
    }
    if (A.determinant() <= 0.0) return false;
  }
  return true;
}

EDSolveResult solve_ed(const EDGraph& g, const DiscretizedPrimitive& model,
                       const DistanceField& f, const EnergyWeights& w,
                       const LMSettings& settings) {
  EDProblem problem(g, model, f, w);
  Eigen::VectorXd x = graph_parameters(g);
  EDSolveResult result;
  result.report = solve_least_squares(problem, x, settings);
  result.graph = g;
  set_graph_parameters(result.graph, x);
  return result;
}

}  // namespace primitect

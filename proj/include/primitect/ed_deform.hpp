#pragma once

#include "primitect/distance_field.hpp"
#include "primitect/lm.hpp"
#include "primitect/primitives.hpp"
#include "primitect/types.hpp"

namespace primitect {

struct EDNode {
  Point3 b = Point3::Zero();    // node position
  Mat3 A = Mat3::Identity();    // local affine
  Point3 t = Point3::Zero();    // local translation
};

struct VertexBinding {
  std::vector<int> nodes;       // k nearest node indices
  std::vector<double> weights;  // >= 0, sum to 1
};

/// Sparse deformation graph: nodes carry local affine transforms, model
/// vertices blend the k nearest nodes with normalized weights.
struct EDGraph {
  std::vector<EDNode> nodes;
  int k = 4;
  std::vector<std::vector<int>> node_neighbors;  // symmetrized k-nearest
  std::vector<VertexBinding> vertex_bindings;    // aligned with the model
};

/// Nodes from uniform voxel averaging of the model vertices; the voxel size
/// is bisected until the node count lands within 10% of node_count. Bindings
/// use weight (1 - d/d_max) with d_max the distance to the (k+1)-th nearest
/// node, normalized per vertex.
EDGraph build_graph(const DiscretizedPrimitive& model, int node_count, int k = 4);

/// Recomputes vertex bindings and node neighborhoods for a model, e.g. after
/// deserializing a graph that only stores node states.
void bind_graph(EDGraph& g, const std::vector<Point3>& vertices);

/// Deformed position of model vertex vertex_index at position v.
Point3 warp_vertex(const EDGraph& g, int vertex_index, const Point3& v);

/// Deformed position of an arbitrary point, bound on the fly to its k
/// nearest nodes.
Point3 warp_point(const EDGraph& g, const Point3& p);

double energy_rot(const EDGraph& g);
double energy_reg(const EDGraph& g);
double energy_data(const EDGraph& g, const DiscretizedPrimitive& model,
                   const DistanceField& f);

struct EnergyWeights {
  double w_rot = 1.0;
  double w_reg = 10.0;
  double w_data = 100.0;
};

double total_energy(const EDGraph& g, const DiscretizedPrimitive& model,
                    const DistanceField& f, const EnergyWeights& w);

/// Flat parameter vector layout: per node 12 values, A row-major then t.
Eigen::VectorXd graph_parameters(const EDGraph& g);
void set_graph_parameters(EDGraph& g, const Eigen::VectorXd& x);

/// Least-squares form of the total energy, with analytic Jacobians for the
/// rotation/regularization terms and field-gradient chain rule for the data
/// term. Steps that flip any det(A_j) sign are vetoed.
class EDProblem : public LeastSquaresProblem {
 public:
  EDProblem(const EDGraph& g, const DiscretizedPrimitive& model,
            const DistanceField& f, const EnergyWeights& w);
  int num_params() const override;
  int num_residuals() const override;
  void eval(const Eigen::VectorXd& x, Eigen::VectorXd& residuals,
            std::vector<Eigen::Triplet<double>>* jac) const override;
  bool step_acceptable(const Eigen::VectorXd& x_new) const override;

 private:
  mutable EDGraph graph_;
  const DiscretizedPrimitive& model_;
  const DistanceField& field_;
  EnergyWeights weights_;
  std::vector<std::pair<int, int>> reg_pairs_;
};

struct EDSolveResult {
  EDGraph graph;
  LMReport report;
};

EDSolveResult solve_ed(const EDGraph& g, const DiscretizedPrimitive& model,
                       const DistanceField& f, const EnergyWeights& w,
                       const LMSettings& settings);

}  // namespace primitect

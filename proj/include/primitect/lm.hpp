#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <vector>

namespace primitect {

struct LMSettings {
  double mu0 = 0.0;  // 0 selects 1e-3 * trace(J^T J) / n_params
  double mu_up = 10.0;
  double mu_down = 10.0;
  int max_iter = 100;
  double rel_tol = 1e-6;
};

struct LMReport {
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // every trial damping increased the objective
  std::vector<double> objective_history;  // accepted objectives, incl. initial
};

/// Nonlinear least squares: minimize ||r(x)||^2.
class LeastSquaresProblem {
 public:
  virtual ~LeastSquaresProblem() = default;
  virtual int num_params() const = 0;
  virtual int num_residuals() const = 0;
  /// Fills residuals; when jac is non-null, also the Jacobian triplets
  /// (row = residual, col = parameter).
  virtual void eval(const Eigen::VectorXd& x, Eigen::VectorXd& residuals,
                    std::vector<Eigen::Triplet<double>>* jac) const = 0;
  /// Veto hook for trial steps (e.g. reflection guards). Vetoed steps are
  /// treated like objective increases.
  virtual bool step_acceptable(const Eigen::VectorXd& /*x_new*/) const {
    return true;
  }
};

LMReport solve_least_squares(const LeastSquaresProblem& problem,
                             Eigen::VectorXd& x, const LMSettings& settings);

}  // namespace primitect

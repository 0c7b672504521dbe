#include "primitect/lm.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>

namespace primitect {

LMReport solve_least_squares(const LeastSquaresProblem& problem,
                             Eigen::VectorXd& x, const LMSettings& settings) {
  const int np = problem.num_params();
  const int nr = problem.num_residuals();
  LMReport report;

  Eigen::VectorXd r(nr);
  std::vector<Eigen::Triplet<double>> triplets;
  problem.eval(x, r, &triplets);
  double objective = r.squaredNorm();
  report.objective_history.push_back(objective);

  Eigen::SparseMatrix<double> J(nr, np);
  J.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseMatrix<double> JtJ = (J.transpose() * J).pruned();
  Eigen::VectorXd g = J.transpose() * r;

  double mu = settings.mu0;
  if (mu <= 0.0) {
    double tr = 0.0;
    for (int c = 0; c < np; ++c) tr += JtJ.coeff(c, c);
    mu = 1e-3 * tr / np;
    if (!(mu > 0.0)) mu = 1e-3;
  }

  Eigen::SparseMatrix<double> identity(np, np);
  identity.setIdentity();

  for (int iter = 0; iter < settings.max_iter; ++iter) {
    report.iterations = iter + 1;
    bool accepted = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Eigen::SparseMatrix<double> A = JtJ + mu * identity;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
      if (solver.info() != Eigen::Success) {
        mu *= settings.mu_up;
        continue;
      }
      const Eigen::VectorXd step = solver.solve(-g);
      const Eigen::VectorXd x_new = x + step;

      Eigen::VectorXd r_new(nr);
      std::vector<Eigen::Triplet<double>> trip_new;
      problem.eval(x_new, r_new, &trip_new);
      const double obj_new = r_new.squaredNorm();

      if (obj_new < objective && problem.step_acceptable(x_new)) {
        const double drop = objective - obj_new;
        x = x_new;
        r = std::move(r_new);
        objective = obj_new;
        report.objective_history.push_back(objective);
        J.setFromTriplets(trip_new.begin(), trip_new.end());
        JtJ = (J.transpose() * J).pruned();
        g = J.transpose() * r;
        mu = std::max(mu / settings.mu_down, 1e-15);
        accepted = true;
        if (drop <= settings.rel_tol * std::max(objective, 1e-300)) {
          report.converged = true;
        }
        break;
      }
      mu *= settings.mu_up;
    }
    if (!accepted) {
      // No damping produced a decrease: either a local minimum, or a stall
      // when nothing was ever accepted.
      report.stalled = report.objective_history.size() <= 1;
      report.converged = !report.stalled;
      break;
    }
    if (report.converged) break;
    if (objective <= 1e-30) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace primitect

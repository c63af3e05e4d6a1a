#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace effbench {

/// Objective to maximize. Writes the gradient into `grad` when non-null.
/// Returning a non-finite value marks the point as infeasible; the line
/// search then backtracks.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BfgsOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double relative_tolerance = 1e-9;
  /// Upper bound on the Euclidean length of a single step.
  double max_step = 5.0;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective value at every accepted iterate, starting point first.
  std::vector<double> trace;
};

/// Quasi-Newton ascent with an inverse-Hessian BFGS update and Armijo
/// backtracking. Accepted iterates never decrease the objective.
BfgsResult maximize_bfgs(const Objective& f, Eigen::VectorXd start, const BfgsOptions& options = {});

/// Newton steps with a numeric Hessian from the end point of `r` until the
/// gradient norm drops below `tol`. Updates `r` in place.
void newton_refine(const Objective& f, BfgsResult& r, double tol, int max_steps = 50);

/// Central-difference Hessian built from an analytic gradient, symmetrized.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double step = 1e-5);

/// Central-difference gradient of the objective value alone.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step = 1e-5);

}  // namespace effbench

#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace effbench {

enum class RowSense { LessEqual, GreaterEqual, Equal };
enum class ObjectiveSense { Minimize, Maximize };

/// optimize c'x subject to A x (<=|>=|=) b, with x_j >= 0 unless marked free.
struct LinearProgram {
  ObjectiveSense sense = ObjectiveSense::Maximize;
  Eigen::VectorXd objective;
  Eigen::MatrixXd constraints;
  std::vector<RowSense> row_sense;
  Eigen::VectorXd rhs;
  std::vector<bool> free_variable;

  Eigen::Index n_variables() const { return objective.size(); }
  Eigen::Index n_rows() const { return constraints.rows(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
  int pivots = 0;
};

struct SimplexOptions {
  int max_pivots = 10000;
  double tolerance = 1e-9;
};

/// Largest constraint or sign violation of x, each row scaled by max(1, |b_i|).
double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x);

/// Solver backend seam; the DEA engine only talks to this interface.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpSolution solve(const LinearProgram& lp) const = 0;
};

/// Two-phase dense revised simplex. The basis inverse is refactored from
/// scratch at every pivot (problems here have a handful of rows), and both
/// the entering and the leaving choice follow Bland's smallest-index rule,
/// so the method cannot cycle and its output is a pure function of the input.
class DenseRevisedSimplex final : public LpSolver {
 public:
  explicit DenseRevisedSimplex(SimplexOptions options = {}) : options_(options) {}
  LpSolution solve(const LinearProgram& lp) const override;

 private:
  SimplexOptions options_;
};

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace effbench

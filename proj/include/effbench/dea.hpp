#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "effbench/frontier.hpp"
#include "effbench/lp.hpp"
#include "effbench/panel.hpp"

namespace effbench {

/// One output-oriented envelopment problem: expand the target's outputs
/// radially as far as the reference technology allows.
struct DeaProblem {
  Eigen::MatrixXd outputs;  // N x M reference outputs
  Eigen::MatrixXd inputs;   // N x K reference inputs
  Eigen::VectorXd target_outputs;
  Eigen::VectorXd target_inputs;
  ReturnsToScale returns_to_scale = ReturnsToScale::Variable;

  /// Target is row `j` of the reference set.
  static DeaProblem for_member(Eigen::MatrixXd outputs, Eigen::MatrixXd inputs, Eigen::Index j,
                               ReturnsToScale rts = ReturnsToScale::Variable);
};

struct DeaResult {
  std::string dmu;
  int period = 0;
  /// Output expansion factor; >= 1 whenever the target belongs to the reference set.
  double phi = 1.0;
  /// 1 / phi.
  double score = 1.0;
  Eigen::VectorXd lambda;
  bool is_efficient = true;
};

struct DeaOptions {
  /// |phi - 1| below this counts as efficient.
  double efficiency_tolerance = 1e-6;
  /// Backend override; the dense revised simplex when null.
  const LpSolver* solver = nullptr;
  unsigned threads = 1;
};

/// Variables (phi, lambda_1..lambda_N); maximize phi subject to
///   sum_i lambda_i y_im >= phi * y_0m   for every output m
///   sum_i lambda_i x_ik <= x_0k         for every input k
///   sum_i lambda_i = 1                  (VRS only)
/// with lambda >= 0 and phi free.
LinearProgram build_lp(const DeaProblem& problem);

/// Solves one problem and verifies the envelopment constraints at the
/// returned (phi, lambda). Throws SolverFailure on a non-optimal LP.
DeaResult solve_dea(const DeaProblem& problem, const DeaOptions& options = {});

/// Scores one (dmu, period) cell against all DMUs of the same period.
DeaResult dea_score(const PanelDataset& panel, const FrontierSpec& spec, std::size_t dmu, std::size_t period,
                    const DeaOptions& options = {});

struct DeaTable {
  std::vector<std::string> dmus;
  std::vector<int> periods;
  /// N*T cells ordered by DMU, then period.
  std::vector<DeaResult> cells;

  const DeaResult& at(std::size_t dmu, std::size_t period) const { return cells[dmu * periods.size() + period]; }
  std::vector<double> scores() const;
  ScoreTable score_table() const;
};

/// Scores every cell. Failed cells are collected and reported together.
DeaTable dea_all(const PanelDataset& panel, const FrontierSpec& spec, const DeaOptions& options = {});

/// Reference-set matrices for one period.
Eigen::MatrixXd period_matrix(const PanelDataset& panel, const std::vector<std::string>& names, std::size_t period);

}  // namespace effbench

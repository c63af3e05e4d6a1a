#include "effbench/dea.hpp"

#include <cmath>

#include "effbench/error.hpp"
#include "effbench/parallel.hpp"

namespace effbench {

DeaProblem DeaProblem::for_member(Eigen::MatrixXd outputs, Eigen::MatrixXd inputs, Eigen::Index j,
                                  ReturnsToScale rts) {
  if (j < 0 || j >= outputs.rows()) throw Error(ErrorCode::InvalidArgument, "DEA target index out of range");
  DeaProblem p;
  p.target_outputs = outputs.row(j).transpose();
  p.target_inputs = inputs.row(j).transpose();
  p.outputs = std::move(outputs);
  p.inputs = std::move(inputs);
  p.returns_to_scale = rts;
  return p;
}

LinearProgram build_lp(const DeaProblem& problem) {
  const Eigen::Index n = problem.outputs.rows();
  const Eigen::Index m = problem.outputs.cols();
  const Eigen::Index k = problem.inputs.cols();
  const bool vrs = problem.returns_to_scale == ReturnsToScale::Variable;
  const Eigen::Index rows = m + k + (vrs ? 1 : 0);

  LinearProgram lp;
  lp.sense = ObjectiveSense::Maximize;
  lp.objective = Eigen::VectorXd::Zero(n + 1);
  lp.objective[0] = 1.0;
  lp.constraints = Eigen::MatrixXd::Zero(rows, n + 1);
  lp.rhs = Eigen::VectorXd::Zero(rows);
  lp.row_sense.resize(rows);
  lp.free_variable.assign(n + 1, false);
  lp.free_variable[0] = true;

  // phi * y_0m - sum_i lambda_i y_im <= 0
  for (Eigen::Index r = 0; r < m; ++r) {
    lp.constraints(r, 0) = problem.target_outputs[r];
    lp.constraints.block(r, 1, 1, n) = -problem.outputs.col(r).transpose();
    lp.row_sense[r] = RowSense::LessEqual;
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    lp.constraints.block(m + r, 1, 1, n) = problem.inputs.col(r).transpose();
    lp.rhs[m + r] = problem.target_inputs[r];
    lp.row_sense[m + r] = RowSense::LessEqual;
  }
  if (vrs) {
    lp.constraints.block(m + k, 1, 1, n).setOnes();
    lp.rhs[m + k] = 1.0;
    lp.row_sense[m + k] = RowSense::Equal;
  }
  return lp;
}

namespace {

void check_problem(const DeaProblem& p) {
  const Eigen::Index n = p.outputs.rows();
  if (n == 0 || p.outputs.cols() == 0 || p.inputs.cols() == 0 || p.inputs.rows() != n ||
      p.target_outputs.size() != p.outputs.cols() || p.target_inputs.size() != p.inputs.cols()) {
    throw Error(ErrorCode::InvalidArgument, "DEA problem dimensions are inconsistent");
  }
  if ((p.outputs.array() <= 0.0).any() || (p.inputs.array() <= 0.0).any() ||
      (p.target_outputs.array() <= 0.0).any() || (p.target_inputs.array() <= 0.0).any()) {
    throw Error(ErrorCode::NonPositiveQuantity, "DEA data must be strictly positive");
  }
}

// Envelopment constraints at (phi, lambda) in the caller's units.
double envelopment_violation(const DeaProblem& p, double phi, const Eigen::VectorXd& lambda) {
  double worst = std::max(0.0, -lambda.minCoeff());
  const Eigen::VectorXd y = p.outputs.transpose() * lambda;
  const Eigen::VectorXd x = p.inputs.transpose() * lambda;
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    worst = std::max(worst, (phi * p.target_outputs[r] - y[r]) / p.target_outputs[r]);
  }
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    worst = std::max(worst, (x[r] - p.target_inputs[r]) / p.target_inputs[r]);
  }
  if (p.returns_to_scale == ReturnsToScale::Variable) worst = std::max(worst, std::fabs(lambda.sum() - 1.0));
  return worst;
}

}  // namespace

DeaResult solve_dea(const DeaProblem& problem, const DeaOptions& options) {
  check_problem(problem);

  // Scores are units-invariant, so solve on columns scaled to unit mean.
  DeaProblem scaled = problem;
  for (Eigen::Index c = 0; c < scaled.outputs.cols(); ++c) {
    const double s = problem.outputs.col(c).mean();
    scaled.outputs.col(c) /= s;
    scaled.target_outputs[c] /= s;
  }
  for (Eigen::Index c = 0; c < scaled.inputs.cols(); ++c) {
    const double s = problem.inputs.col(c).mean();
    scaled.inputs.col(c) /= s;
    scaled.target_inputs[c] /= s;
  }

  const LinearProgram lp = build_lp(scaled);
  const DenseRevisedSimplex fallback;
  const LpSolver& solver = options.solver ? *options.solver : fallback;
  const LpSolution sol = solver.solve(lp);
  if (sol.status != LpStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, "DEA linear program ended with status " + std::string(to_string(sol.status)));
  }

  DeaResult result;
  result.phi = sol.x[0];
  result.lambda = sol.x.tail(sol.x.size() - 1);
  if (std::fabs(result.phi - 1.0) <= 1e-9) result.phi = 1.0;
  if (envelopment_violation(problem, result.phi, result.lambda) > 1e-8) {
    throw Error(ErrorCode::SolverFailure, "returned (phi, lambda) violates the envelopment constraints");
  }
  if (!(result.phi > 0.0)) throw Error(ErrorCode::SolverFailure, "non-positive expansion factor");
  result.score = 1.0 / result.phi;
  result.is_efficient = std::fabs(result.phi - 1.0) <= options.efficiency_tolerance;
  return result;
}

Eigen::MatrixXd period_matrix(const PanelDataset& panel, const std::vector<std::string>& names, std::size_t period) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(panel.n_dmus()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto col = panel.column(names[c]);
    for (std::size_t i = 0; i < panel.n_dmus(); ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = col[panel.row(i, period)];
    }
  }
  return out;
}

DeaResult dea_score(const PanelDataset& panel, const FrontierSpec& spec, std::size_t dmu, std::size_t period,
                    const DeaOptions& options) {
  spec.validate(panel);
  if (dmu >= panel.n_dmus() || period >= panel.n_periods()) {
    throw Error(ErrorCode::InvalidArgument, "DEA cell out of range");
  }
  auto problem = DeaProblem::for_member(period_matrix(panel, spec.outputs, period),
                                        period_matrix(panel, spec.inputs, period),
                                        static_cast<Eigen::Index>(dmu), spec.returns_to_scale);
  DeaResult result = solve_dea(problem, options);
  result.dmu = panel.dmus()[dmu];
  result.period = panel.periods()[period];
  return result;
}

std::vector<double> DeaTable::scores() const {
  std::vector<double> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.score);
  return out;
}

ScoreTable DeaTable::score_table() const { return ScoreTable{dmus, periods, scores()}; }

DeaTable dea_all(const PanelDataset& panel, const FrontierSpec& spec, const DeaOptions& options) {
  spec.validate(panel);
  DeaTable table;
  table.dmus = panel.dmus();
  table.periods = panel.periods();
  const std::size_t n_periods = panel.n_periods();
  table.cells.resize(panel.n_obs());
  std::vector<std::string> failures(panel.n_obs());

  std::vector<Eigen::MatrixXd> outputs, inputs;
  for (std::size_t t = 0; t < n_periods; ++t) {
    outputs.push_back(period_matrix(panel, spec.outputs, t));
    inputs.push_back(period_matrix(panel, spec.inputs, t));
  }
  parallel_for(
      panel.n_obs(),
      [&](std::size_t cell) {
        const std::size_t i = cell / n_periods;
        const std::size_t t = cell % n_periods;
        try {
          auto problem = DeaProblem::for_member(outputs[t], inputs[t], static_cast<Eigen::Index>(i),
                                                spec.returns_to_scale);
          DeaResult r = solve_dea(problem, options);
          r.dmu = panel.dmus()[i];
          r.period = panel.periods()[t];
          table.cells[cell] = std::move(r);
        } catch (const Error& e) {
          failures[cell] = "(" + panel.dmus()[i] + ", " + std::to_string(panel.periods()[t]) + "): " + e.what();
        }
      },
      options.threads);

  std::string message;
  for (const auto& f : failures) {
    if (f.empty()) continue;
    if (!message.empty()) message += "; ";
    message += f;
  }
  if (!message.empty()) throw Error(ErrorCode::SolverFailure, message);
  return table;
}

}  // namespace effbench

#include "effbench/lp.hpp"

#include <cmath>
#include <algorithm>
#include <limits>

#include "effbench/error.hpp"

namespace effbench {

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < lp.n_variables(); ++j) {
    const bool is_free = j < static_cast<Eigen::Index>(lp.free_variable.size()) && lp.free_variable[j];
    if (!is_free) worst = std::max(worst, -x[j]);
  }
  const Eigen::VectorXd ax = lp.constraints * x;
  for (Eigen::Index i = 0; i < lp.n_rows(); ++i) {
    const double scale = std::max(1.0, std::fabs(lp.rhs[i]));
    const double gap = (ax[i] - lp.rhs[i]) / scale;
    switch (lp.row_sense[i]) {
      case RowSense::LessEqual: worst = std::max(worst, gap); break;
      case RowSense::GreaterEqual: worst = std::max(worst, -gap); break;
      case RowSense::Equal: worst = std::max(worst, std::fabs(gap)); break;
    }
  }
  return worst;
}

namespace {

// min c'x, A x = b, x >= 0, b >= 0 with an explicit starting basis.
struct StandardForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<Eigen::Index> basis;
  std::vector<bool> artificial;
  // original variable j -> (positive column, negative column or -1)
  std::vector<std::pair<Eigen::Index, Eigen::Index>> origin;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const Eigen::Index m = lp.n_rows();
  const Eigen::Index n = lp.n_variables();
  StandardForm sf;
  std::vector<Eigen::VectorXd> cols;
  std::vector<double> cost;
  const double sign = lp.sense == ObjectiveSense::Maximize ? -1.0 : 1.0;

  Eigen::VectorXd row_flip = Eigen::VectorXd::Ones(m);
  std::vector<RowSense> sense = lp.row_sense;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lp.rhs[i] < 0.0) {
      row_flip[i] = -1.0;
      if (sense[i] == RowSense::LessEqual) sense[i] = RowSense::GreaterEqual;
      else if (sense[i] == RowSense::GreaterEqual) sense[i] = RowSense::LessEqual;
    }
  }
  sf.b = row_flip.cwiseProduct(lp.rhs);

  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd col = row_flip.cwiseProduct(lp.constraints.col(j));
    const auto pos = static_cast<Eigen::Index>(cols.size());
    cols.push_back(col);
    cost.push_back(sign * lp.objective[j]);
    Eigen::Index neg = -1;
    if (j < static_cast<Eigen::Index>(lp.free_variable.size()) && lp.free_variable[j]) {
      neg = static_cast<Eigen::Index>(cols.size());
      cols.push_back(-col);
      cost.push_back(-sign * lp.objective[j]);
    }
    sf.origin.emplace_back(pos, neg);
  }
  sf.basis.assign(m, -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sense[i] == RowSense::Equal) continue;
    Eigen::VectorXd slack = Eigen::VectorXd::Zero(m);
    slack[i] = sense[i] == RowSense::LessEqual ? 1.0 : -1.0;
    if (sense[i] == RowSense::LessEqual) sf.basis[i] = static_cast<Eigen::Index>(cols.size());
    cols.push_back(slack);
    cost.push_back(0.0);
  }
  const auto n_structural = static_cast<Eigen::Index>(cols.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sf.basis[i] >= 0) continue;
    Eigen::VectorXd art = Eigen::VectorXd::Zero(m);
    art[i] = 1.0;
    sf.basis[i] = static_cast<Eigen::Index>(cols.size());
    cols.push_back(art);
    cost.push_back(0.0);
  }
  const auto total = static_cast<Eigen::Index>(cols.size());
  sf.a.resize(m, total);
  sf.c.resize(total);
  sf.artificial.assign(total, false);
  for (Eigen::Index j = 0; j < total; ++j) {
    sf.a.col(j) = cols[j];
    sf.c[j] = cost[j];
    sf.artificial[j] = j >= n_structural;
  }
  return sf;
}

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

class SimplexRun {
 public:
  SimplexRun(StandardForm& sf, const SimplexOptions& options) : sf_(sf), options_(options) {}

  PhaseResult run(const Eigen::VectorXd& cost, bool allow_artificial_entry) {
    const Eigen::Index m = sf_.a.rows();
    const Eigen::Index total = sf_.a.cols();
    std::vector<bool> in_basis(total, false);
    while (true) {
      for (Eigen::Index j = 0; j < total; ++j) in_basis[j] = false;
      for (Eigen::Index j : sf_.basis) in_basis[j] = true;
      refactor();
      Eigen::VectorXd cb(m);
      for (Eigen::Index i = 0; i < m; ++i) cb[i] = cost[sf_.basis[i]];
      const Eigen::VectorXd duals = lu_.transpose().solve(cb);

      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < total; ++j) {
        if (in_basis[j]) continue;
        if (sf_.artificial[j] && !allow_artificial_entry) continue;
        const double reduced = cost[j] - duals.dot(sf_.a.col(j));
        if (reduced < -options_.tolerance) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return PhaseResult::Optimal;
      if (pivots_ >= options_.max_pivots) return PhaseResult::IterationLimit;

      const Eigen::VectorXd w = lu_.solve(sf_.a.col(entering));
      Eigen::Index leave_row = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (w[i] <= options_.tolerance) continue;
        const double ratio = std::max(0.0, xb_[i]) / w[i];
        if (leave_row < 0) {
          leave_row = i;
          best_ratio = ratio;
          continue;
        }
        const double slack = 1e-12 * std::max(1.0, best_ratio);
        if (ratio < best_ratio - slack) {
          leave_row = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + slack && sf_.basis[i] < sf_.basis[leave_row]) {
          leave_row = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      if (leave_row < 0) return PhaseResult::Unbounded;
      sf_.basis[leave_row] = entering;
      ++pivots_;
    }
  }

  void refactor() {
    const Eigen::Index m = sf_.a.rows();
    Eigen::MatrixXd basis_matrix(m, m);
    for (Eigen::Index i = 0; i < m; ++i) basis_matrix.col(i) = sf_.a.col(sf_.basis[i]);
    lu_.compute(basis_matrix);
    xb_ = lu_.solve(sf_.b);
  }

  // Replace zero-valued basic artificials by structural columns after phase 1.
  void evict_artificials() {
    const Eigen::Index m = sf_.a.rows();
    const Eigen::Index total = sf_.a.cols();
    for (Eigen::Index r = 0; r < m; ++r) {
      if (!sf_.artificial[sf_.basis[r]]) continue;
      refactor();
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(m);
      unit[r] = 1.0;
      const Eigen::VectorXd row = lu_.transpose().solve(unit);
      for (Eigen::Index j = 0; j < total; ++j) {
        if (sf_.artificial[j]) continue;
        if (std::find(sf_.basis.begin(), sf_.basis.end(), j) != sf_.basis.end()) continue;
        if (std::fabs(row.dot(sf_.a.col(j))) > 1e-7) {
          sf_.basis[r] = j;
          ++pivots_;
          break;
        }
      }
    }
    refactor();
  }

  const Eigen::VectorXd& basic_values() const { return xb_; }
  int pivots() const { return pivots_; }

 private:
  StandardForm& sf_;
  const SimplexOptions& options_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd xb_;
  int pivots_ = 0;
};

}  // namespace

LpSolution DenseRevisedSimplex::solve(const LinearProgram& lp) const {
  const Eigen::Index n = lp.n_variables();
  if (lp.constraints.cols() != n || lp.rhs.size() != lp.n_rows() ||
      static_cast<Eigen::Index>(lp.row_sense.size()) != lp.n_rows()) {
    throw Error(ErrorCode::InvalidArgument, "linear program dimensions are inconsistent");
  }
  if (!lp.constraints.allFinite() || !lp.rhs.allFinite() || !lp.objective.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "linear program has non-finite coefficients");
  }

  StandardForm sf = to_standard_form(lp);
  SimplexRun run(sf, options_);
  LpSolution solution;

  const bool needs_phase1 = std::any_of(sf.basis.begin(), sf.basis.end(),
                                        [&](Eigen::Index j) { return sf.artificial[j]; });
  if (needs_phase1) {
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(sf.a.cols());
    for (Eigen::Index j = 0; j < sf.a.cols(); ++j) {
      if (sf.artificial[j]) phase1_cost[j] = 1.0;
    }
    const PhaseResult p1 = run.run(phase1_cost, true);
    solution.pivots = run.pivots();
    if (p1 == PhaseResult::IterationLimit) {
      solution.status = LpStatus::IterationLimit;
      return solution;
    }
    run.refactor();
    double infeasibility = 0.0;
    for (Eigen::Index i = 0; i < sf.a.rows(); ++i) {
      if (sf.artificial[sf.basis[i]]) infeasibility += std::max(0.0, run.basic_values()[i]);
    }
    const double b_scale = std::max(1.0, sf.b.cwiseAbs().maxCoeff());
    if (infeasibility > 1e-9 * b_scale) {
      solution.status = LpStatus::Infeasible;
      return solution;
    }
    run.evict_artificials();
  }

  const PhaseResult p2 = run.run(sf.c, false);
  solution.pivots = run.pivots();
  if (p2 == PhaseResult::IterationLimit) {
    solution.status = LpStatus::IterationLimit;
    return solution;
  }
  if (p2 == PhaseResult::Unbounded) {
    solution.status = LpStatus::Unbounded;
    return solution;
  }

  run.refactor();
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(sf.a.cols());
  for (Eigen::Index i = 0; i < sf.a.rows(); ++i) {
    const double v = run.basic_values()[i];
    xs[sf.basis[i]] = std::fabs(v) < options_.tolerance ? 0.0 : v;
  }
  solution.x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto [pos, neg] = sf.origin[j];
    solution.x[j] = xs[pos] - (neg >= 0 ? xs[neg] : 0.0);
  }
  solution.objective = lp.objective.dot(solution.x);
  solution.status = LpStatus::Optimal;
  return solution;
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  return DenseRevisedSimplex(options).solve(lp);
}

}  // namespace effbench

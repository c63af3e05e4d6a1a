#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "effbench/frontier.hpp"
#include "effbench/panel.hpp"

namespace effbench {

/// Translog output distance function in regression form:
///   ln y_M = -TL(ln x, ln y*) + v - u,   y*_m = y_m / y_M,
/// so the response -ln y_M equals TL + u - v and TE = exp(-u) is the
/// output distance.
///
/// Columns, in order: constant; ln y*_m; ln x_k; 1/2 ln y*_m ln y*_n for
/// m <= n (squares first, then cross products); 1/2 ln x_k ln x_l for k <= l
/// in the same order; ln x_k ln y*_n for every (k, n). One column per
/// unordered pair imposes symmetry; normalizing by y_M imposes homogeneity
/// of degree one in outputs.
struct TranslogDesign {
  Eigen::VectorXd response;
  Eigen::MatrixXd regressors;
  std::vector<std::string> names;
  std::size_t n_dmus = 0;
  std::size_t n_periods = 0;

  Eigen::Index n_coefficients() const { return regressors.cols(); }
};

/// Number of translog coefficients for M outputs and K inputs.
std::size_t translog_size(std::size_t n_outputs, std::size_t n_inputs);

/// Regressor block from logs of normalized outputs (rows x (M-1)) and inputs (rows x K).
Eigen::MatrixXd translog_regressors(const Eigen::MatrixXd& log_ystar, const Eigen::MatrixXd& log_x);

/// Coefficient labels in column order; normalized outputs carry a trailing '.
std::vector<std::string> translog_names(const std::vector<std::string>& ratio_outputs,
                                        const std::vector<std::string>& inputs);

/// Rows follow the panel (DMU-major). Needs M >= 2, K >= 1 and a normalizing
/// output. Throws DegenerateDesign when the regressors are rank deficient.
TranslogDesign build_design(const PanelDataset& panel, const FrontierSpec& spec);

/// Frontier coefficients plus the composed-error parameters.
/// u_it = exp(-eta (t - T)) u_i with u_i ~ N+(mu, gamma sigma_sq),
/// v_it ~ N(0, (1 - gamma) sigma_sq).
struct SfaParams {
  Eigen::VectorXd beta;
  double sigma_sq = 1.0;
  double gamma = 0.5;
  double mu = 0.0;
  double eta = 0.0;

  double sigma_u_sq() const { return gamma * sigma_sq; }
  double sigma_v_sq() const { return (1.0 - gamma) * sigma_sq; }
};

/// Unconstrained parameter vector [beta, ln sigma_sq, logit gamma, mu?, eta].
/// mu is omitted when `half_normal` is set.
Eigen::VectorXd to_transformed(const SfaParams& params, bool half_normal = false);
SfaParams from_transformed(const Eigen::VectorXd& theta, Eigen::Index n_beta, bool half_normal = false);

/// Panel log-likelihood of the time-decay model; the integral over u_i is closed form.
double loglik(const SfaParams& params, const TranslogDesign& design);

/// Log-likelihood and its analytic gradient with respect to the transformed vector.
double loglik_transformed(const Eigen::VectorXd& theta, const TranslogDesign& design, bool half_normal,
                          Eigen::VectorXd* gradient);

/// Analytic gradient on the transformed scale.
Eigen::VectorXd grad_loglik(const SfaParams& params, const TranslogDesign& design, bool half_normal = false);

struct SfaOptions {
  int starts = 5;
  double gradient_tolerance = 1e-6;
  double relative_tolerance = 1e-9;
  int max_iterations = 500;
  /// Fix mu = 0 (half-normal inefficiency).
  bool half_normal = false;
  std::uint64_t seed = 20111014;
  unsigned threads = 1;
};

struct ConvergenceRecord {
  int iterations = 0;
  double gradient_norm = 0.0;
  int restarts = 0;
  int converged_starts = 0;
  /// Log-likelihood at each accepted iterate of the winning start.
  std::vector<double> trace;
};

struct SfaFit {
  SfaParams params;
  /// Coefficient labels followed by sigma_sq, gamma, mu, eta.
  std::vector<std::string> names;
  /// Estimates aligned with `names`, natural scale.
  Eigen::VectorXd estimates;
  /// Standard errors from the inverse observed information (delta method
  /// for sigma_sq and gamma). NaN where unavailable; mu's is NaN under half-normal.
  Eigen::VectorXd std_errors;
  double log_likelihood = 0.0;
  /// Technical efficiency per (dmu, period), DMU-major.
  std::vector<double> te;
  std::size_t n_obs = 0;
  ConvergenceRecord convergence;
};

/// Multi-start quasi-Newton maximum likelihood. Throws NonConvergence when no start converges.
SfaFit fit_sfa(const TranslogDesign& design, const SfaOptions& options = {});

/// E[exp(-u_it) | eps_i1..eps_iT] for every cell, DMU-major.
std::vector<double> predict_te(const SfaParams& params, const TranslogDesign& design);

/// Ordinary least squares of the response on the regressors.
Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace effbench

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "effbench/frontier.hpp"
#include "effbench/panel.hpp"

namespace effbench {

/// Determinant design: an intercept named "Constant" followed by named
/// covariate columns. Rows follow the panel (DMU-major).
class CovariateMatrix {
 public:
  /// `columns` excludes the intercept; `groups` (cluster ids, e.g. DMU index) may be empty.
  CovariateMatrix(std::vector<std::string> names, std::vector<CovariateKind> kinds, const Eigen::MatrixXd& columns,
                  std::vector<std::size_t> groups = {});

  /// Columns `names` of the panel, clustered by DMU.
  static CovariateMatrix from_panel(const PanelDataset& panel, const std::vector<std::string>& names);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<CovariateKind>& kinds() const { return kinds_; }
  const Eigen::MatrixXd& matrix() const { return z_; }
  const std::vector<std::size_t>& groups() const { return groups_; }
  Eigen::Index rows() const { return z_.rows(); }
  Eigen::Index cols() const { return z_.cols(); }

  CovariateMatrix select_rows(const std::vector<Eigen::Index>& rows) const;

 private:
  std::vector<std::string> names_;
  std::vector<CovariateKind> kinds_;
  Eigen::MatrixXd z_;
  std::vector<std::size_t> groups_;
};

struct TobitOptions {
  /// Sandwich standard errors clustered on CovariateMatrix::groups.
  bool cluster = false;
  double gradient_tolerance = 1e-6;
  int max_iterations = 500;
};

struct TobitFit {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  double sigma = 0.0;
  /// Standard errors of beta, then sigma.
  Eigen::VectorXd std_errors;
  double log_likelihood = 0.0;
  double log_likelihood_start = 0.0;
  std::size_t n_lower = 0;
  std::size_t n_upper = 0;
  std::size_t n_uncensored = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool clustered = false;
};

/// Two-limit Tobit, censored at 0 and 1, by quasi-Newton on (beta, log sigma).
/// Throws Degeneracy when every observation sits at one limit or Z is rank deficient.
TobitFit tobit_fit(const std::vector<double>& scores, const CovariateMatrix& z, const TobitOptions& options = {});

/// Two-limit Tobit log-likelihood at (beta, sigma).
double tobit_loglik(const std::vector<double>& scores, const Eigen::MatrixXd& z, const Eigen::VectorXd& beta,
                    double sigma);

struct TruncregFit {
  std::vector<std::string> names;
  Eigen::VectorXd delta;
  double sigma = 0.0;
  Eigen::VectorXd std_errors;
  double log_likelihood = 0.0;
  std::size_t n_obs = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Normal regression of theta on Z truncated to theta <= 1.
/// Throws PreconditionViolated for efficient rows (theta >= 1 - 1e-6),
/// InsufficientInteriorScores below p + 2 rows, NonConvergence.
TruncregFit truncreg_fit(const std::vector<double>& scores, const CovariateMatrix& z);

/// Truncated-normal log-likelihood at (delta, sigma).
double truncreg_loglik(const std::vector<double>& scores, const Eigen::MatrixXd& z, const Eigen::VectorXd& delta,
                       double sigma);

enum class SwAlgorithm { Alg1, Alg2 };

struct SimarWilsonOptions {
  SwAlgorithm algorithm = SwAlgorithm::Alg2;
  int l1 = 100;
  int l2 = 1000;
  double level = 0.95;
  std::uint64_t seed = 20111014;
  unsigned threads = 1;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
};

struct SimarWilsonFit {
  std::vector<std::string> names;
  Eigen::VectorXd delta;
  double sigma = 0.0;
  double level = 0.95;
  /// Percentile intervals at `level`; NaN when L2 = 0.
  std::vector<ConfidenceInterval> ci;
  /// 0-3 stars from the 90/95/99% intervals excluding zero.
  std::vector<int> stars;
  /// Standard deviation of the bootstrap replicates.
  Eigen::VectorXd bootstrap_se;
  SwAlgorithm algorithm = SwAlgorithm::Alg2;
  int l1 = 0;
  int l2 = 0;
  std::uint64_t seed = 0;
  int failed_replicates = 0;
  /// Rows that entered the truncated regression.
  std::size_t n_obs = 0;
  /// First-stage DEA scores and, for Alg2, their bias-corrected values (DMU-major).
  std::vector<double> scores;
  std::vector<double> bias_corrected;
};

/// Parametric bootstrap of the truncated regression (the outer loop shared by both algorithms).
SimarWilsonFit truncreg_bootstrap(const std::vector<double>& scores, const CovariateMatrix& z,
                                  const SimarWilsonOptions& options);

/// Simar-Wilson second stage on output-oriented VRS DEA scores. Z rows follow the panel.
SimarWilsonFit simar_wilson(const PanelDataset& panel, const FrontierSpec& frontier, const CovariateMatrix& z,
                            const SimarWilsonOptions& options = {});

/// Same as above with first-stage scores already computed.
SimarWilsonFit simar_wilson(const PanelDataset& panel, const FrontierSpec& frontier, const CovariateMatrix& z,
                            const std::vector<double>& dea_scores, const SimarWilsonOptions& options);

/// 0-3 stars from a two-sided normal test at 10/5/1%.
int stars_from_z(double estimate, double std_error);

struct CoefficientColumn {
  std::string title;
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<int> stars;
};

CoefficientColumn coefficient_column(const TobitFit& fit, std::string title = "Tobit (SFA)");
CoefficientColumn coefficient_column(const SimarWilsonFit& fit, std::string title = "Simar Wilson (DEA)");

struct DeterminantsTable {
  std::vector<std::string> names;
  std::vector<CoefficientColumn> columns;
};

/// Side-by-side coefficient table. Throws CovariateMismatch when names differ.
DeterminantsTable determinants_report(const CoefficientColumn& left, const CoefficientColumn& right);
DeterminantsTable determinants_report(const TobitFit& tobit, const SimarWilsonFit& sw);

}  // namespace effbench

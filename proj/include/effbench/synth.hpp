#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "effbench/frontier.hpp"
#include "effbench/panel.hpp"
#include "effbench/sfa.hpp"

namespace effbench {

/// Synthetic translog panel with time-decaying inefficiency.
struct SynthSpec {
  std::size_t n_dmus = 50;
  std::size_t n_periods = 6;
  std::size_t n_outputs = 3;
  std::size_t n_inputs = 3;
  /// Translog coefficients in build_design column order. Empty selects default_translog_beta.
  Eigen::VectorXd beta;
  double sigma_v = 0.1;
  double sigma_u = 0.3;
  double mu = 0.0;
  double eta = 0.0;
  /// Log-uniform bounds for inputs and for the normalized outputs y_m / y_M.
  double input_lo = 1.0;
  double input_hi = 100.0;
  double ratio_lo = 0.1;
  double ratio_hi = 10.0;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument.
  void validate() const;
};

/// A smooth, monotone frontier used when SynthSpec::beta is empty.
Eigen::VectorXd default_translog_beta(std::size_t n_outputs, std::size_t n_inputs);

struct SynthPanel {
  PanelDataset panel;
  FrontierSpec frontier;
  SfaParams truth;
  /// exp(-u_it), DMU-major.
  std::vector<double> true_te;
};

/// Outputs y1..yM (y1 normalizes), inputs x1..xK, periods 1..T.
/// Every DMU draws from its own stream (seed, dmu).
SynthPanel gen_sfa_panel(const SynthSpec& spec);

struct DeaSynthSpec {
  std::size_t n_dmus = 20;
  std::size_t n_periods = 1;
  std::size_t n_outputs = 1;
  std::size_t n_inputs = 1;
  /// DMUs per period placed on the frontier (at least 2, capped at n_dmus).
  std::size_t n_frontier = 5;
  double theta_lo = 0.5;
  double theta_hi = 0.95;
  /// Input scale range of frontier DMUs.
  double scale_lo = 1.0;
  double scale_hi = 100.0;
  /// Optional scores for the off-frontier cells (N*T, DMU-major); frontier cells ignore theirs.
  std::vector<double> theta;
  std::uint64_t seed = 1;
};

struct DeaSynthPanel {
  PanelDataset panel;
  FrontierSpec frontier;
  /// Output-oriented score of every cell by construction, DMU-major.
  std::vector<double> true_theta;
};

/// Frontier DMUs sit on y = s^0.6 * b, x = s * a (fixed mixes a, b), which is
/// strictly concave in s, so every one of them is VRS-efficient. The others
/// take inputs on a segment between two adjacent frontier DMUs and outputs
/// contracted radially by their stored theta.
DeaSynthPanel gen_dea_panel(const DeaSynthSpec& spec);

/// theta = Z delta + eps with eps ~ N(0, sigma^2) truncated to theta <= 1,
/// drawn by rejection from the parent normal. Row i uses stream (seed, i).
/// Throws RejectionStall when the acceptance rate drops below 1e-4.
std::vector<double> gen_truncated_scores(const Eigen::MatrixXd& z, const Eigen::VectorXd& delta, double sigma,
                                         std::uint64_t seed);

/// y = clamp(Z beta + eps, 0, 1), eps ~ N(0, sigma^2).
std::vector<double> gen_censored_scores(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta, double sigma,
                                        std::uint64_t seed);

/// Spanish-airport-like panel: outputs ATM, SIZE (= PAX / ATM), NAR; inputs
/// EMP, RUNW, TERM; covariates ISLE, HUB, TOUR, CONG, LCC, SUB, EBITDA, HSR,
/// HH, NARPAX. Money (NAR, EMP, SUB, EBITDA) is in millions at base-year
/// prices. Outputs follow a Cobb-Douglas output distance function with
/// time-decaying inefficiency whose pre-truncation mean depends on ISLE,
/// HUB, TOUR and CONG. Output and input columns are rescaled so their means
/// equal the reference sample's.
struct AenaSpec {
  std::size_t n_airports = 38;
  int first_year = 2011;
  std::size_t n_years = 4;
  double sigma_u = 0.45;
  double sigma_v = 0.1;
  double eta = -0.05;
  std::uint64_t seed = 2014;
};

struct AenaSample {
  /// Real (deflated) values; PAX is included next to the derived SIZE.
  PanelDataset panel;
  FrontierSpec frontier;
  std::vector<std::string> covariates;
  /// Price index by year (base year = 1) used to produce nominal money columns.
  std::map<int, double> price_index;
  std::vector<double> true_te;
};

AenaSample gen_aena_sample(const AenaSpec& spec = {});

/// Rejection draw from N(mu, sigma^2) restricted to [0, inf).
double draw_positive_normal(double mu, double sigma, class CounterRng& rng);

}  // namespace effbench

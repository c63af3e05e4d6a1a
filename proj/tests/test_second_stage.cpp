#include <algorithm>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "effbench/dea.hpp"
#include "effbench/error.hpp"
#include "effbench/normal.hpp"
#include "effbench/rng.hpp"
#include "effbench/second_stage.hpp"
#include "effbench/synth.hpp"
#include "oracles.hpp"

using namespace effbench;

namespace {

// Intercept plus `k` continuous covariates drawn uniformly on [0, 1).
CovariateMatrix random_covariates(Eigen::Index n, Eigen::Index k, std::uint64_t seed, std::size_t cluster = 0) {
  CounterRng rng(seed);
  Eigen::MatrixXd cols(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) cols(i, j) = rng.uniform();
  }
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < k; ++j) names.push_back("z" + std::to_string(j + 1));
  std::vector<std::size_t> groups;
  if (cluster) {
    for (Eigen::Index i = 0; i < n; ++i) groups.push_back(static_cast<std::size_t>(i) / cluster);
  }
  return CovariateMatrix(names, std::vector<CovariateKind>(static_cast<std::size_t>(k), CovariateKind::Continuous),
                         cols, groups);
}

ErrorCode thrown_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("covariate matrix layout and validation") {
  const auto z = random_covariates(10, 2, 1);
  CHECK(z.names() == std::vector<std::string>{"Constant", "z1", "z2"});
  CHECK(z.matrix().col(0).isOnes());
  CHECK(z.cols() == 3);

  Eigen::MatrixXd bad(3, 1);
  bad << 0, 1, 2;
  CHECK(thrown_code([&] { CovariateMatrix({"D"}, {CovariateKind::Dummy}, bad); }) == ErrorCode::InvalidCovariate);
  bad << 0, 1.5, 2;
  CHECK(thrown_code([&] { CovariateMatrix({"C"}, {CovariateKind::Count}, bad); }) == ErrorCode::InvalidCovariate);
  CHECK(thrown_code([&] { CovariateMatrix({"Constant"}, {CovariateKind::Continuous}, bad); }) ==
        ErrorCode::InvalidCovariate);

  const auto sub = z.select_rows({0, 4, 9});
  CHECK(sub.rows() == 3);
  CHECK(sub.matrix().row(1) == z.matrix().row(4));
}

TEST_CASE("tobit without censoring equals OLS") {
  const auto z = random_covariates(80, 3, 2);
  Eigen::VectorXd beta(4);
  beta << 0.5, 0.1, -0.1, 0.05;
  CounterRng rng(3);
  std::vector<double> y(80);
  for (Eigen::Index i = 0; i < 80; ++i) y[static_cast<std::size_t>(i)] = z.matrix().row(i).dot(beta) + rng.normal(0, 0.05);
  for (double v : y) REQUIRE((v > 0.0 && v < 1.0));
  const auto fit = tobit_fit(y, z);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 80);
  const Eigen::VectorXd b_ols = z.matrix().colPivHouseholderQr().solve(yv);
  CHECK((fit.beta - b_ols).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(fit.sigma == doctest::Approx(std::sqrt((yv - z.matrix() * b_ols).squaredNorm() / 80.0)).epsilon(1e-6));
  CHECK(fit.n_uncensored == 80);
  CHECK(fit.n_lower + fit.n_upper == 0);
  CHECK(fit.log_likelihood >= fit.log_likelihood_start);
  CHECK(fit.std_errors.allFinite());
}

TEST_CASE("tobit degeneracy and rank errors") {
  const auto z = random_covariates(20, 2, 4);
  CHECK(thrown_code([&] { tobit_fit(std::vector<double>(20, 1.0), z); }) == ErrorCode::Degeneracy);
  CHECK(thrown_code([&] { tobit_fit(std::vector<double>(20, 0.0), z); }) == ErrorCode::Degeneracy);
  Eigen::MatrixXd cols = Eigen::MatrixXd::Constant(20, 1, 3.0);
  CovariateMatrix constant({"c"}, {CovariateKind::Continuous}, cols);
  std::vector<double> y(20, 0.5);
  y[0] = 0.4;
  CHECK(thrown_code([&] { tobit_fit(y, constant); }) == ErrorCode::Degeneracy);
  CHECK(thrown_code([&] { tobit_fit(std::vector<double>(19, 0.5), z); }) == ErrorCode::CovariateMismatch);
}

TEST_CASE("tobit censoring counts, ascent, clustered errors and gradient") {
  const auto z = random_covariates(200, 2, 5, 4);
  Eigen::VectorXd beta(3);
  beta << 0.75, 0.2, -0.1;
  const auto y = gen_censored_scores(z.matrix(), beta, 0.15, 6);
  const auto fit = tobit_fit(y, z);
  CHECK(fit.n_lower + fit.n_upper + fit.n_uncensored == 200);
  CHECK(fit.n_upper > 10);
  CHECK(fit.log_likelihood >= fit.log_likelihood_start);
  CHECK(fit.gradient_norm < 1e-6);
  CHECK(tobit_loglik(y, z.matrix(), fit.beta, fit.sigma) == doctest::Approx(fit.log_likelihood).epsilon(1e-12));

  // Central differences of the likelihood vanish at the optimum.
  for (Eigen::Index j = 0; j < 3; ++j) {
    Eigen::VectorXd up = fit.beta, dn = fit.beta;
    up[j] += 1e-6;
    dn[j] -= 1e-6;
    CHECK(std::fabs(tobit_loglik(y, z.matrix(), up, fit.sigma) - tobit_loglik(y, z.matrix(), dn, fit.sigma)) / 2e-6 <
          1e-4);
  }

  TobitOptions opt;
  opt.cluster = true;
  const auto clustered = tobit_fit(y, z, opt);
  CHECK(clustered.clustered);
  CHECK(clustered.beta == fit.beta);
  CHECK(clustered.std_errors.allFinite());
  CHECK((clustered.std_errors - fit.std_errors).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("truncated likelihood is the Gaussian density over the truncation mass") {
  CounterRng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const double mean = rng.uniform(0.3, 1.3);
    const double sigma = rng.uniform(0.05, 0.5);
    const double y = std::min(0.999, mean + sigma * rng.normal());
    const auto mass = oracle::simpson([&](double t) { return normal::pdf((t - mean) / sigma) / sigma; },
                                      mean - 40.0 * sigma, 1.0, 200000);
    const double direct = std::log(normal::pdf((y - mean) / sigma) / sigma / mass);
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(1, 1);
    Eigen::VectorXd d(1);
    d << mean;
    CHECK(truncreg_loglik({y}, z, d, sigma) == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("truncreg matches a brute-force grid MLE with one covariate") {
  const auto z = random_covariates(60, 1, 8);
  Eigen::VectorXd delta(2);
  delta << 0.7, 0.25;
  const auto y = gen_truncated_scores(z.matrix(), delta, 0.15, 9);
  const auto fit = truncreg_fit(y, z);
  auto f = [&](const std::vector<double>& p) {
    Eigen::VectorXd d(2);
    d << p[0], p[1];
    return truncreg_loglik(y, z.matrix(), d, std::exp(p[2]));
  };
  const auto best = oracle::grid_zoom_maximize(f, {0.7, 0.25, std::log(0.15)}, {0.5, 0.5, 1.0}, 11, 1e-7);
  CHECK(fit.delta[0] == doctest::Approx(best[0]).epsilon(1e-4));
  CHECK(std::fabs(fit.delta[1] - best[1]) <= 1e-4);
  CHECK(fit.sigma == doctest::Approx(std::exp(best[2])).epsilon(1e-4));
  CHECK(fit.log_likelihood >= f(best) - 1e-9);
}

TEST_CASE("truncreg approaches OLS when truncation never binds") {
  const auto z = random_covariates(100, 2, 10);
  Eigen::VectorXd delta(3);
  delta << 0.2, 0.05, -0.05;
  const auto y = gen_truncated_scores(z.matrix(), delta, 0.02, 11);
  const auto fit = truncreg_fit(y, z);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 100);
  const Eigen::VectorXd b_ols = z.matrix().colPivHouseholderQr().solve(yv);
  CHECK((fit.delta - b_ols).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("truncreg preconditions") {
  const auto z = random_covariates(10, 2, 12);
  std::vector<double> y(10, 0.6);
  y[3] = 1.0;
  CHECK(thrown_code([&] { truncreg_fit(y, z); }) == ErrorCode::PreconditionViolated);
  const auto few = random_covariates(4, 3, 13);
  CHECK(thrown_code([&] { truncreg_fit(std::vector<double>(4, 0.5), few); }) == ErrorCode::InsufficientInteriorScores);
}

TEST_CASE("truncreg recovers known coefficients") {
  const int reps = 100;
  Eigen::VectorXd delta(3);
  delta << 0.8, -0.3, 0.2;
  std::vector<Eigen::VectorXd> est;
  for (int r = 0; r < reps; ++r) {
    const auto z = random_covariates(200, 2, 100 + r);
    est.push_back(truncreg_fit(gen_truncated_scores(z.matrix(), delta, 0.2, 500 + r), z).delta);
  }
  for (Eigen::Index j = 0; j < 3; ++j) {
    double m = 0.0;
    for (const auto& e : est) m += e[j];
    m /= reps;
    double v = 0.0;
    for (const auto& e : est) v += (e[j] - m) * (e[j] - m);
    const double mc_se = std::sqrt(v / (reps - 1) / reps);
    CHECK(std::fabs(m - delta[j]) <= 3.0 * mc_se);
  }
}

TEST_CASE("simar-wilson: reductions, determinism, intervals") {
  const std::size_t n = 30;
  const std::size_t t_len = 2;
  const auto z = random_covariates(static_cast<Eigen::Index>(n * t_len), 2, 14);
  Eigen::VectorXd delta(3);
  delta << 0.75, -0.2, 0.15;
  auto theta = gen_truncated_scores(z.matrix(), delta, 0.1, 15);
  for (auto& v : theta) v = std::clamp(v, 0.05, 1.0);
  DeaSynthSpec spec;
  spec.n_dmus = n;
  spec.n_periods = t_len;
  spec.n_frontier = 5;
  spec.theta = theta;
  const auto g = gen_dea_panel(spec);
  const auto dea = dea_all(g.panel, g.frontier).scores();

  SimarWilsonOptions alg1;
  alg1.algorithm = SwAlgorithm::Alg1;
  alg1.l2 = 0;
  const auto sw0 = simar_wilson(g.panel, g.frontier, z, alg1);
  std::vector<Eigen::Index> rows;
  std::vector<double> interior;
  for (std::size_t i = 0; i < dea.size(); ++i) {
    if (dea[i] < 1.0 - 1e-6) {
      rows.push_back(static_cast<Eigen::Index>(i));
      interior.push_back(dea[i]);
    }
  }
  const auto tr = truncreg_fit(interior, z.select_rows(rows));
  CHECK(sw0.delta == tr.delta);
  CHECK(sw0.sigma == tr.sigma);
  CHECK(std::isnan(sw0.ci[0].lower));

  SimarWilsonOptions alg2;
  alg2.l1 = 20;
  alg2.l2 = 0;
  const auto sw2_0 = simar_wilson(g.panel, g.frontier, z, alg2);
  REQUIRE(sw2_0.bias_corrected.size() == dea.size());
  std::vector<Eigen::Index> rows2;
  std::vector<double> corrected;
  for (std::size_t i = 0; i < dea.size(); ++i) {
    CHECK(sw2_0.bias_corrected[i] <= dea[i] + 1e-9);
    if (sw2_0.bias_corrected[i] < 1.0 - 1e-6) {
      rows2.push_back(static_cast<Eigen::Index>(i));
      corrected.push_back(sw2_0.bias_corrected[i]);
    }
  }
  CHECK(sw2_0.delta == truncreg_fit(corrected, z.select_rows(rows2)).delta);

  alg2.l2 = 200;
  const auto a = simar_wilson(g.panel, g.frontier, z, alg2);
  const auto b = simar_wilson(g.panel, g.frontier, z, alg2);
  auto threaded = alg2;
  threaded.threads = 3;
  const auto c = simar_wilson(g.panel, g.frontier, z, threaded);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(a.ci[j].lower == b.ci[j].lower);
    CHECK(a.ci[j].upper == b.ci[j].upper);
    CHECK(a.ci[j].lower == c.ci[j].lower);
    CHECK(a.ci[j].upper == c.ci[j].upper);
    CHECK(a.ci[j].lower <= a.delta[static_cast<Eigen::Index>(j)]);
    CHECK(a.delta[static_cast<Eigen::Index>(j)] <= a.ci[j].upper);
  }
  CHECK(a.bias_corrected == c.bias_corrected);
  CHECK(a.algorithm == SwAlgorithm::Alg2);
  CHECK(a.l1 == 20);
  CHECK(a.l2 == 200);
  auto other = alg2;
  other.seed = 99;
  CHECK(simar_wilson(g.panel, g.frontier, z, other).ci[1].lower != a.ci[1].lower);
}

TEST_CASE("bootstrap interval width settles as L2 grows") {
  const auto z = random_covariates(60, 2, 40);
  Eigen::VectorXd delta(3);
  delta << 0.7, -0.2, 0.2;
  const auto y = gen_truncated_scores(z.matrix(), delta, 0.15, 60);
  auto widths = [&](int l2) {
    std::vector<double> w;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SimarWilsonOptions opt;
      opt.l2 = l2;
      opt.seed = 1000 + seed;
      const auto fit = truncreg_bootstrap(y, z, opt);
      double total = 0.0;
      for (const auto& ci : fit.ci) total += ci.upper - ci.lower;
      w.push_back(total);
    }
    std::sort(w.begin(), w.end());
    return w;
  };
  auto mean_sd = [](const std::vector<double>& w) {
    double m = 0.0;
    for (double v : w) m += v;
    m /= static_cast<double>(w.size());
    double ss = 0.0;
    for (double v : w) ss += (v - m) * (v - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(w.size() - 1))};
  };
  const auto small = widths(100);
  const auto large = widths(2000);
  const auto [m_small, sd_small] = mean_sd(small);
  const auto [m_large, sd_large] = mean_sd(large);
  MESSAGE("width L2=100: " << m_small << " +- " << sd_small << ", L2=2000: " << m_large << " +- " << sd_large);
  CHECK(sd_large < 0.5 * sd_small);
  CHECK(m_large <= 1.05 * small[18]);
}

TEST_CASE("determinants report") {
  CoefficientColumn a{"A", {"Constant", "ISLE", "HUB"}, {0.8, 0.0, -0.2}, {3, 0, 2}};
  const auto same = determinants_report(a, a);
  CHECK(same.columns[0].estimates == same.columns[1].estimates);
  CHECK(same.columns[0].stars == same.columns[1].stars);
  CHECK(same.names == a.names);
  CoefficientColumn b = a;
  b.names[2] = "TOUR";
  CHECK(thrown_code([&] { determinants_report(a, b); }) == ErrorCode::CovariateMismatch);

  CHECK(stars_from_z(0.0, 0.1) == 0);
  CHECK(stars_from_z(0.17, 0.1) == 1);   // z = 1.7
  CHECK(stars_from_z(0.2, 0.1) == 2);    // z = 2.0
  CHECK(stars_from_z(-0.3, 0.1) == 3);   // z = -3.0
  CHECK(stars_from_z(1.0, std::nan("")) == 0);

  const auto z = random_covariates(40, 2, 70);
  Eigen::VectorXd beta(3);
  beta << 0.6, 0.0, 0.0;
  const auto tobit = tobit_fit(gen_censored_scores(z.matrix(), beta, 0.1, 71), z);
  const auto col = coefficient_column(tobit);
  CHECK(col.names == z.names());
  CHECK(col.stars[0] == 3);
}

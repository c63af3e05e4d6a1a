#include "effbench/second_stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "effbench/dea.hpp"
#include "effbench/error.hpp"
#include "effbench/normal.hpp"
#include "effbench/optimize.hpp"
#include "effbench/parallel.hpp"
#include "effbench/rng.hpp"

namespace effbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEfficient = 1e-6;
constexpr std::uint64_t kOuterStream = 0x5157'0000'0000ULL;
constexpr std::uint64_t kInnerStream = 0x5157'1000'0000ULL;

void check_rank(const Eigen::MatrixXd& z, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-10);
  if (z.rows() < z.cols() || qr.rank() < z.cols()) {
    throw Error(ErrorCode::Degeneracy, std::string(what) + ": covariate matrix has rank " + std::to_string(qr.rank()) +
                                           " < " + std::to_string(z.cols()) + " columns");
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

BfgsResult maximize(const Objective& f, const Eigen::VectorXd& start, double tol, int max_iterations) {
  BfgsOptions opt;
  opt.gradient_tolerance = tol;
  opt.max_iterations = max_iterations;
  BfgsResult r = maximize_bfgs(f, start, opt);
  if (std::isfinite(r.value) && !r.converged && r.gradient_norm < 1e-1) newton_refine(f, r, tol);
  return r;
}

// Inverse of the negative Hessian, or NaNs when it is not positive definite.
Eigen::MatrixXd inverse_information(const Eigen::MatrixXd& hessian) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(-hessian);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all()) {
    return Eigen::MatrixXd::Constant(hessian.rows(), hessian.cols(), kNaN);
  }
  return ldlt.solve(Eigen::MatrixXd::Identity(hessian.rows(), hessian.cols()));
}

// ---- Tobit ----------------------------------------------------------------

enum class Censor { Lower, None, Upper };

Censor classify(double y) { return y <= 0.0 ? Censor::Lower : y >= 1.0 ? Censor::Upper : Censor::None; }

// Log-likelihood in (beta, log sigma); per-observation scores when requested.
double tobit_eval(const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const Eigen::VectorXd& theta,
                  Eigen::VectorXd* grad, Eigen::MatrixXd* scores) {
  const Eigen::Index p = z.cols();
  const Eigen::VectorXd beta = theta.head(p);
  const double log_sigma = theta[p];
  const double sigma = std::exp(log_sigma);
  if (!std::isfinite(sigma) || !(sigma > 0)) return kNaN;
  const Eigen::VectorXd xb = z * beta;
  double ll = 0.0;
  if (grad) grad->setZero(p + 1);
  if (scores) scores->resize(z.rows(), p + 1);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double d_xb = 0.0;  // d l_i / d (x_i beta)
    double d_ls = 0.0;  // d l_i / d log sigma
    switch (classify(y[i])) {
      case Censor::None: {
        const double r = (y[i] - xb[i]) / sigma;
        ll += normal::log_pdf(r) - log_sigma;
        d_xb = r / sigma;
        d_ls = r * r - 1.0;
        break;
      }
      case Censor::Lower: {
        const double a = -xb[i] / sigma;
        ll += normal::log_cdf(a);
        const double m = normal::mills(a);
        d_xb = -m / sigma;
        d_ls = -m * a;
        break;
      }
      case Censor::Upper: {
        const double c = (xb[i] - 1.0) / sigma;
        ll += normal::log_cdf(c);
        const double m = normal::mills(c);
        d_xb = m / sigma;
        d_ls = -m * c;
        break;
      }
    }
    if (grad) {
      grad->head(p) += d_xb * z.row(i).transpose();
      (*grad)[p] += d_ls;
    }
    if (scores) {
      scores->row(i).head(p) = d_xb * z.row(i);
      (*scores)(i, p) = d_ls;
    }
  }
  return ll;
}

// ---- Truncated regression -------------------------------------------------

double truncreg_eval(const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const Eigen::VectorXd& theta,
                     Eigen::VectorXd* grad) {
  const Eigen::Index p = z.cols();
  const double log_sigma = theta[p];
  const double sigma = std::exp(log_sigma);
  if (!std::isfinite(sigma) || !(sigma > 0)) return kNaN;
  const Eigen::VectorXd mean = z * theta.head(p);
  double ll = 0.0;
  if (grad) grad->setZero(p + 1);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double r = (y[i] - mean[i]) / sigma;
    const double b = (1.0 - mean[i]) / sigma;
    ll += normal::log_pdf(r) - log_sigma - normal::log_cdf(b);
    if (grad) {
      const double m = normal::mills(b);
      grad->head(p) += ((r + m) / sigma) * z.row(i).transpose();
      (*grad)[p] += r * r - 1.0 + m * b;
    }
  }
  return ll;
}

struct TruncregCore {
  Eigen::VectorXd theta;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

TruncregCore truncreg_mle(const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const Eigen::VectorXd& start) {
  const Objective f = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g) { return truncreg_eval(y, z, th, g); };
  BfgsResult r = maximize(f, start, 1e-6, 500);
  return {r.x, r.value, r.gradient_norm, r.iterations, r.converged && std::isfinite(r.value)};
}

Eigen::VectorXd ols_start(const Eigen::VectorXd& y, const Eigen::MatrixXd& z) {
  const Eigen::Index p = z.cols();
  Eigen::VectorXd start(p + 1);
  start.head(p) = z.colPivHouseholderQr().solve(y);
  const double rss = (y - z * start.head(p)).squaredNorm();
  start[p] = 0.5 * std::log(std::max(rss / static_cast<double>(y.size()), 1e-12));
  return start;
}

// Draw from N(mean, sigma^2) restricted to (lo, hi] by inversion.
double draw_truncated(double mean, double sigma, double lo, double hi, CounterRng& rng) {
  const double a = normal::cdf((lo - mean) / sigma);
  const double b = normal::cdf((hi - mean) / sigma);
  const double p = std::clamp(a + rng.uniform() * (b - a), 1e-300, 1.0 - 1e-16);
  return std::min(hi, mean + sigma * normal::quantile(p));
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

// ---- CovariateMatrix --------------------------------------------------------

CovariateMatrix::CovariateMatrix(std::vector<std::string> names, std::vector<CovariateKind> kinds,
                                 const Eigen::MatrixXd& columns, std::vector<std::size_t> groups)
    : groups_(std::move(groups)) {
  if (names.size() != static_cast<std::size_t>(columns.cols()) || kinds.size() != names.size()) {
    throw Error(ErrorCode::InvalidArgument, "covariate names, kinds and columns disagree in count");
  }
  if (!groups_.empty() && groups_.size() != static_cast<std::size_t>(columns.rows())) {
    throw Error(ErrorCode::InvalidArgument, "cluster ids must match the row count");
  }
  std::set<std::string> seen{"Constant"};
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw Error(ErrorCode::InvalidCovariate, "duplicate or reserved covariate name '" + n + "'");
  }
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    const auto& name = names[static_cast<std::size_t>(c)];
    const auto kind = kinds[static_cast<std::size_t>(c)];
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
      const double v = columns(r, c);
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidCovariate, name + " has a non-finite value");
      if (kind == CovariateKind::Dummy && v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::InvalidCovariate, name + " is a dummy but holds " + std::to_string(v));
      }
      if (kind == CovariateKind::Count && (v < 0.0 || v != std::floor(v))) {
        throw Error(ErrorCode::InvalidCovariate, name + " is a count but holds " + std::to_string(v));
      }
    }
  }
  names_.push_back("Constant");
  kinds_.push_back(CovariateKind::Continuous);
  names_.insert(names_.end(), names.begin(), names.end());
  kinds_.insert(kinds_.end(), kinds.begin(), kinds.end());
  z_.resize(columns.rows(), columns.cols() + 1);
  z_.col(0).setOnes();
  z_.rightCols(columns.cols()) = columns;
}

CovariateMatrix CovariateMatrix::from_panel(const PanelDataset& panel, const std::vector<std::string>& names) {
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(panel.n_obs()), static_cast<Eigen::Index>(names.size()));
  std::vector<CovariateKind> kinds;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto& info = panel.variable(names[c]);
    kinds.push_back(info.kind);
    const auto col = panel.column(names[c]);
    for (std::size_t r = 0; r < panel.n_obs(); ++r) {
      cols(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
    }
  }
  std::vector<std::size_t> groups(panel.n_obs());
  for (std::size_t r = 0; r < panel.n_obs(); ++r) groups[r] = r / panel.n_periods();
  return CovariateMatrix(names, kinds, cols, std::move(groups));
}

CovariateMatrix CovariateMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(rows.size()), z_.cols() - 1);
  std::vector<std::size_t> groups;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    cols.row(static_cast<Eigen::Index>(k)) = z_.row(rows[k]).tail(z_.cols() - 1);
    if (!groups_.empty()) groups.push_back(groups_[static_cast<std::size_t>(rows[k])]);
  }
  return CovariateMatrix(std::vector<std::string>(names_.begin() + 1, names_.end()),
                         std::vector<CovariateKind>(kinds_.begin() + 1, kinds_.end()), cols, std::move(groups));
}

// ---- Tobit ------------------------------------------------------------------

double tobit_loglik(const std::vector<double>& scores, const Eigen::MatrixXd& z, const Eigen::VectorXd& beta,
                    double sigma) {
  Eigen::VectorXd theta(beta.size() + 1);
  theta.head(beta.size()) = beta;
  theta[beta.size()] = std::log(sigma);
  return tobit_eval(to_vector(scores), z, theta, nullptr, nullptr);
}

TobitFit tobit_fit(const std::vector<double>& scores, const CovariateMatrix& cov, const TobitOptions& options) {
  const Eigen::MatrixXd& z = cov.matrix();
  if (static_cast<Eigen::Index>(scores.size()) != z.rows()) {
    throw Error(ErrorCode::CovariateMismatch, "scores and covariates have different row counts");
  }
  const Eigen::VectorXd y = to_vector(scores);
  if (!y.allFinite()) throw Error(ErrorCode::InvalidArgument, "scores must be finite");
  TobitFit fit;
  for (double v : scores) {
    switch (classify(v)) {
      case Censor::Lower: ++fit.n_lower; break;
      case Censor::Upper: ++fit.n_upper; break;
      case Censor::None: ++fit.n_uncensored; break;
    }
  }
  if (fit.n_lower == scores.size() || fit.n_upper == scores.size()) {
    throw Error(ErrorCode::Degeneracy, "every observation is censored at the same limit");
  }
  check_rank(z, "tobit");

  const Objective f = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g) { return tobit_eval(y, z, th, g, nullptr); };
  const Eigen::VectorXd start = ols_start(y, z);
  fit.log_likelihood_start = f(start, nullptr);
  const BfgsResult r = maximize(f, start, options.gradient_tolerance, options.max_iterations);
  if (!r.converged || !std::isfinite(r.value)) {
    throw Error(ErrorCode::NonConvergence, "tobit: gradient norm " + std::to_string(r.gradient_norm) + " after " +
                                               std::to_string(r.iterations) + " iterations");
  }
  const Eigen::Index p = z.cols();
  fit.names = cov.names();
  fit.beta = r.x.head(p);
  fit.sigma = std::exp(r.x[p]);
  fit.log_likelihood = r.value;
  fit.iterations = r.iterations;
  fit.gradient_norm = r.gradient_norm;

  Eigen::MatrixXd cov_theta = inverse_information(numeric_hessian(f, r.x));
  if (options.cluster) {
    if (cov.groups().empty()) throw Error(ErrorCode::InvalidArgument, "clustered errors need cluster ids");
    Eigen::MatrixXd s;
    Eigen::VectorXd g(p + 1);
    tobit_eval(y, z, r.x, &g, &s);
    std::map<std::size_t, Eigen::VectorXd> sums;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      auto [it, fresh] = sums.try_emplace(cov.groups()[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(p + 1));
      it->second += s.row(i).transpose();
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (const auto& [id, v] : sums) meat += v * v.transpose();
    const double groups = static_cast<double>(sums.size());
    const double adjust = groups > 1 ? groups / (groups - 1.0) : 1.0;
    cov_theta = adjust * cov_theta * meat * cov_theta;
    fit.clustered = true;
  }
  const Eigen::VectorXd se = cov_theta.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.std_errors.resize(p + 1);
  fit.std_errors.head(p) = se.head(p);
  fit.std_errors[p] = se[p] * fit.sigma;
  return fit;
}

// ---- Truncated regression ---------------------------------------------------

double truncreg_loglik(const std::vector<double>& scores, const Eigen::MatrixXd& z, const Eigen::VectorXd& delta,
                       double sigma) {
  Eigen::VectorXd theta(delta.size() + 1);
  theta.head(delta.size()) = delta;
  theta[delta.size()] = std::log(sigma);
  return truncreg_eval(to_vector(scores), z, theta, nullptr);
}

TruncregFit truncreg_fit(const std::vector<double>& scores, const CovariateMatrix& cov) {
  const Eigen::MatrixXd& z = cov.matrix();
  if (static_cast<Eigen::Index>(scores.size()) != z.rows()) {
    throw Error(ErrorCode::CovariateMismatch, "scores and covariates have different row counts");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw Error(ErrorCode::InvalidArgument, "scores must be finite");
    if (scores[i] >= 1.0 - kEfficient) {
      throw Error(ErrorCode::PreconditionViolated,
                  "row " + std::to_string(i) + " has an efficient score; drop score-1 units before truncreg");
    }
  }
  const Eigen::Index p = z.cols();
  if (z.rows() < p + 2) {
    throw Error(ErrorCode::InsufficientInteriorScores, std::to_string(z.rows()) + " interior scores for " +
                                                           std::to_string(p) + " coefficients (need p + 2)");
  }
  check_rank(z, "truncreg");
  const Eigen::VectorXd y = to_vector(scores);
  const TruncregCore core = truncreg_mle(y, z, ols_start(y, z));
  if (!core.converged) {
    throw Error(ErrorCode::NonConvergence, "truncreg: gradient norm " + std::to_string(core.gradient_norm) +
                                               " after " + std::to_string(core.iterations) + " iterations");
  }
  TruncregFit fit;
  fit.names = cov.names();
  fit.delta = core.theta.head(p);
  fit.sigma = std::exp(core.theta[p]);
  fit.log_likelihood = core.value;
  fit.n_obs = scores.size();
  fit.iterations = core.iterations;
  fit.gradient_norm = core.gradient_norm;
  const Objective f = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g) { return truncreg_eval(y, z, th, g); };
  const Eigen::VectorXd se = inverse_information(numeric_hessian(f, core.theta)).diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.std_errors.resize(p + 1);
  fit.std_errors.head(p) = se.head(p);
  fit.std_errors[p] = se[p] * fit.sigma;
  return fit;
}

// ---- Simar-Wilson -----------------------------------------------------------

SimarWilsonFit truncreg_bootstrap(const std::vector<double>& scores, const CovariateMatrix& cov,
                                  const SimarWilsonOptions& options) {
  if (options.l2 < 0) throw Error(ErrorCode::InvalidArgument, "L2 must be non-negative");
  if (!(options.level > 0.0 && options.level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must be in (0, 1)");
  const TruncregFit base = truncreg_fit(scores, cov);
  const Eigen::MatrixXd& z = cov.matrix();
  const Eigen::Index p = z.cols();

  SimarWilsonFit fit;
  fit.names = base.names;
  fit.delta = base.delta;
  fit.sigma = base.sigma;
  fit.level = options.level;
  fit.algorithm = SwAlgorithm::Alg1;
  fit.l2 = options.l2;
  fit.seed = options.seed;
  fit.n_obs = base.n_obs;
  fit.ci.assign(static_cast<std::size_t>(p), {kNaN, kNaN});
  fit.stars.assign(static_cast<std::size_t>(p), 0);
  fit.bootstrap_se = Eigen::VectorXd::Constant(p, kNaN);
  if (options.l2 == 0) return fit;

  const Eigen::VectorXd mean = z * base.delta;
  Eigen::VectorXd start(p + 1);
  start.head(p) = base.delta;
  start[p] = std::log(base.sigma);
  std::vector<std::optional<Eigen::VectorXd>> reps(static_cast<std::size_t>(options.l2));
  parallel_for(
      reps.size(),
      [&](std::size_t b) {
        CounterRng rng(options.seed, kOuterStream + b);
        Eigen::VectorXd y(z.rows());
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
          y[i] = draw_truncated(mean[i], base.sigma, -std::numeric_limits<double>::infinity(), 1.0, rng);
        }
        const TruncregCore core = truncreg_mle(y, z, start);
        if (core.converged) reps[b] = core.theta.head(p);
      },
      options.threads);

  std::vector<Eigen::VectorXd> ok;
  for (auto& r : reps) {
    if (r) ok.push_back(*r);
  }
  fit.failed_replicates = options.l2 - static_cast<int>(ok.size());
  if (2 * fit.failed_replicates > options.l2) {
    throw Error(ErrorCode::BootstrapDegenerate, std::to_string(fit.failed_replicates) + " of " +
                                                    std::to_string(options.l2) + " bootstrap replicates failed");
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> v;
    v.reserve(ok.size());
    for (const auto& r : ok) v.push_back(r[j]);
    std::sort(v.begin(), v.end());
    const double alpha = 1.0 - options.level;
    auto& ci = fit.ci[static_cast<std::size_t>(j)];
    ci.lower = quantile_sorted(v, alpha / 2);
    ci.upper = quantile_sorted(v, 1 - alpha / 2);
    int stars = 0;
    for (double a : {0.10, 0.05, 0.01}) {
      if (quantile_sorted(v, a / 2) > 0.0 || quantile_sorted(v, 1 - a / 2) < 0.0) ++stars;
    }
    fit.stars[static_cast<std::size_t>(j)] = stars;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    fit.bootstrap_se[j] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : kNaN;
  }
  return fit;
}

SimarWilsonFit simar_wilson(const PanelDataset& panel, const FrontierSpec& frontier, const CovariateMatrix& z,
                            const SimarWilsonOptions& options) {
  DeaOptions dea_opt;
  dea_opt.threads = options.threads;
  return simar_wilson(panel, frontier, z, dea_all(panel, frontier, dea_opt).scores(), options);
}

SimarWilsonFit simar_wilson(const PanelDataset& panel, const FrontierSpec& frontier, const CovariateMatrix& z,
                            const std::vector<double>& dea_scores, const SimarWilsonOptions& options) {
  frontier.validate(panel);
  if (static_cast<std::size_t>(z.rows()) != panel.n_obs() || dea_scores.size() != panel.n_obs()) {
    throw Error(ErrorCode::CovariateMismatch, "covariate rows, scores and panel cells must agree");
  }
  if (options.l1 < 0) throw Error(ErrorCode::InvalidArgument, "L1 must be non-negative");

  auto interior_rows = [](const std::vector<double>& s) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 1.0 - kEfficient) rows.push_back(static_cast<Eigen::Index>(i));
    }
    return rows;
  };
  auto subset = [](const std::vector<double>& s, const std::vector<Eigen::Index>& rows) {
    std::vector<double> out;
    for (auto r : rows) out.push_back(s[static_cast<std::size_t>(r)]);
    return out;
  };

  std::vector<Eigen::Index> rows = interior_rows(dea_scores);
  std::vector<double> second_stage_scores = dea_scores;
  std::vector<double> corrected;

  if (options.algorithm == SwAlgorithm::Alg2 && options.l1 > 0) {
    const TruncregFit first = truncreg_fit(subset(dea_scores, rows), z.select_rows(rows));
    const Eigen::VectorXd mean = z.matrix() * first.delta;
    const std::size_t n = panel.n_dmus();
    const std::size_t t_len = panel.n_periods();
    std::vector<Eigen::MatrixXd> ys, xs;
    for (std::size_t t = 0; t < t_len; ++t) {
      ys.push_back(period_matrix(panel, frontier.outputs, t));
      xs.push_back(period_matrix(panel, frontier.inputs, t));
    }
    // phi_star[b][cell]
    std::vector<std::vector<double>> phi_star(static_cast<std::size_t>(options.l1));
    std::vector<std::string> failure(phi_star.size());
    parallel_for(
        phi_star.size(),
        [&](std::size_t b) {
          CounterRng rng(options.seed, kInnerStream + b);
          std::vector<double> theta_star(panel.n_obs());
          for (std::size_t c = 0; c < panel.n_obs(); ++c) {
            // Kept above zero so pseudo outputs stay positive.
            theta_star[c] = draw_truncated(mean[static_cast<Eigen::Index>(c)], first.sigma, 0.0, 1.0, rng);
          }
          auto& out = phi_star[b];
          out.resize(panel.n_obs());
          for (std::size_t t = 0; t < t_len; ++t) {
            Eigen::MatrixXd pseudo = ys[t];
            for (std::size_t i = 0; i < n; ++i) {
              const std::size_t c = i * t_len + t;
              pseudo.row(static_cast<Eigen::Index>(i)) *= theta_star[c] / dea_scores[c];
            }
            for (std::size_t i = 0; i < n; ++i) {
              DeaProblem prob{pseudo, xs[t], ys[t].row(static_cast<Eigen::Index>(i)).transpose(),
                              xs[t].row(static_cast<Eigen::Index>(i)).transpose(), frontier.returns_to_scale};
              out[i * t_len + t] = solve_dea(prob).phi;
            }
          }
        },
        options.threads);
    corrected.resize(panel.n_obs());
    for (std::size_t c = 0; c < panel.n_obs(); ++c) {
      double mean_phi = 0.0;
      for (const auto& rep : phi_star) mean_phi += rep[c];
      mean_phi /= static_cast<double>(phi_star.size());
      const double phi_hat = 1.0 / dea_scores[c];
      corrected[c] = 1.0 / (2.0 * phi_hat - mean_phi);
    }
    second_stage_scores = corrected;
    rows = interior_rows(corrected);
  }

  SimarWilsonFit fit = truncreg_bootstrap(subset(second_stage_scores, rows), z.select_rows(rows), options);
  fit.algorithm = options.algorithm;
  fit.l1 = options.algorithm == SwAlgorithm::Alg2 ? options.l1 : 0;
  fit.scores = dea_scores;
  fit.bias_corrected = std::move(corrected);
  return fit;
}

// ---- Reporting --------------------------------------------------------------

int stars_from_z(double estimate, double std_error) {
  if (!(std_error > 0) || !std::isfinite(estimate)) return 0;
  const double p = normal::two_sided_p(estimate / std_error);
  return p < 0.01 ? 3 : p < 0.05 ? 2 : p < 0.10 ? 1 : 0;
}

CoefficientColumn coefficient_column(const TobitFit& fit, std::string title) {
  CoefficientColumn col{std::move(title), fit.names, {}, {}};
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    col.estimates.push_back(fit.beta[j]);
    col.stars.push_back(stars_from_z(fit.beta[j], fit.std_errors[j]));
  }
  return col;
}

CoefficientColumn coefficient_column(const SimarWilsonFit& fit, std::string title) {
  CoefficientColumn col{std::move(title), fit.names, {}, fit.stars};
  for (Eigen::Index j = 0; j < fit.delta.size(); ++j) col.estimates.push_back(fit.delta[j]);
  return col;
}

DeterminantsTable determinants_report(const CoefficientColumn& left, const CoefficientColumn& right) {
  if (left.names != right.names) {
    std::string a, b;
    for (const auto& n : left.names) a += (a.empty() ? "" : ",") + n;
    for (const auto& n : right.names) b += (b.empty() ? "" : ",") + n;
    throw Error(ErrorCode::CovariateMismatch, "covariates differ: [" + a + "] vs [" + b + "]");
  }
  return {left.names, {left, right}};
}

DeterminantsTable determinants_report(const TobitFit& tobit, const SimarWilsonFit& sw) {
  return determinants_report(coefficient_column(tobit), coefficient_column(sw));
}

}  // namespace effbench

#include "effbench/sfa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "effbench/error.hpp"
#include "effbench/normal.hpp"
#include "effbench/optimize.hpp"
#include "effbench/parallel.hpp"
#include "effbench/rng.hpp"

namespace effbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double logistic(double l) { return l >= 0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l)); }

struct Scales {
  double sigma_sq;
  double gamma;
  double one_minus_gamma;
  double s_v() const { return one_minus_gamma * sigma_sq; }
  double s_u() const { return gamma * sigma_sq; }
};

struct Partials {
  Eigen::VectorXd beta;
  double s_v = 0.0;
  double s_u = 0.0;
  double mu = 0.0;
  double eta = 0.0;
};

// Sum of per-DMU log-likelihood terms. Partials are with respect to
// (beta, sigma_v^2, sigma_u^2, mu, eta).
double evaluate(const TranslogDesign& d, const Eigen::VectorXd& beta, const Scales& sc, double mu, double eta,
                Partials* out) {
  const auto n = static_cast<Eigen::Index>(d.n_dmus);
  const auto t_len = static_cast<Eigen::Index>(d.n_periods);
  const double s_v = sc.s_v();
  const double s_u = sc.s_u();
  if (!(s_v > 0) || !(s_u > 0) || !std::isfinite(mu) || !std::isfinite(eta)) return kNaN;

  const Eigen::VectorXd eps = d.regressors * beta - d.response;
  Eigen::VectorXd h(t_len);
  Eigen::VectorXd dh(t_len);  // dh_t / d eta
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const double lag = static_cast<double>(t + 1 - t_len);
    h[t] = std::exp(-eta * lag);
    dh[t] = -lag * h[t];
  }
  const double a = h.squaredNorm();
  const double big_d = s_v + s_u * a;
  const double q = big_d * s_v * s_u;
  const double sqrt_q = std::sqrt(q);
  const double w = mu / std::sqrt(s_u);
  const double tt = static_cast<double>(t_len);

  const double per_dmu_const = -0.5 * tt * std::log(2.0 * std::numbers::pi) - 0.5 * (tt - 1.0) * std::log(s_v) -
                               0.5 * std::log(big_d) - 0.5 * mu * mu / s_u - normal::log_cdf(w);
  double total = per_dmu_const * static_cast<double>(n);

  Eigen::VectorXd d_eps;
  if (out) {
    out->beta = Eigen::VectorXd::Zero(beta.size());
    out->s_v = 0.0;
    out->s_u = 0.0;
    out->mu = 0.0;
    out->eta = 0.0;
    d_eps = Eigen::VectorXd::Zero(eps.size());
  }
  double sum_dl_da = 0.0;
  double sum_dl_dh_eps = 0.0;  // sum_i dl/db_i * sum_t dh_t eps_it

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto e = eps.segment(i * t_len, t_len);
    const double b = h.dot(e);
    const double c = e.squaredNorm();
    const double num = mu * s_v - s_u * b;
    const double z = num / sqrt_q;
    total += -0.5 * c / s_v + 0.5 * z * z + normal::log_cdf(z);
    if (!out) continue;

    const double g_z = z + normal::mills(z);
    const double dz_dsv = mu / sqrt_q - 0.5 * z * (s_v * s_u + big_d * s_u) / q;
    const double dz_dsu = -b / sqrt_q - 0.5 * z * (s_v * s_u * a + big_d * s_v) / q;
    const double dz_dmu = s_v / sqrt_q;
    const double dz_da = -0.5 * z * s_v * s_u * s_u / q;
    const double dz_db = -s_u / sqrt_q;

    out->s_v += 0.5 * c / (s_v * s_v) + g_z * dz_dsv;
    out->s_u += g_z * dz_dsu;
    out->mu += g_z * dz_dmu;
    const double dl_db = g_z * dz_db;
    const double dl_dc = -0.5 / s_v;
    sum_dl_da += g_z * dz_da;
    sum_dl_dh_eps += dl_db * dh.dot(e);
    d_eps.segment(i * t_len, t_len) = dl_db * h + 2.0 * dl_dc * e;
  }
  if (!out) return total;

  const double dn = static_cast<double>(n);
  out->s_v += dn * (-0.5 * (tt - 1.0) / s_v - 0.5 / big_d);
  out->s_u += dn * (-0.5 * a / big_d + 0.5 * mu * mu / (s_u * s_u) +
                    0.5 * normal::mills(w) * mu * std::pow(s_u, -1.5));
  out->mu += dn * (-mu / s_u - normal::mills(w) / std::sqrt(s_u));
  const double dl_da = sum_dl_da + dn * (-0.5 * s_u / big_d);
  out->eta = dl_da * 2.0 * h.dot(dh) + sum_dl_dh_eps;
  out->beta = d.regressors.transpose() * d_eps;
  return total;
}

Scales scales_from_theta(const Eigen::VectorXd& theta, Eigen::Index nb) {
  const double l = theta[nb + 1];
  return {std::exp(theta[nb]), logistic(l), logistic(-l)};
}

void check_structure(const TranslogDesign& d) {
  if (d.n_dmus == 0 || d.n_periods == 0 ||
      static_cast<std::size_t>(d.response.size()) != d.n_dmus * d.n_periods ||
      d.regressors.rows() != d.response.size()) {
    throw Error(ErrorCode::InvalidArgument, "design rows do not match the N x T panel structure");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::size_t translog_size(std::size_t m, std::size_t k) {
  return 1 + (m - 1) + (m - 1) * m / 2 + k + k * (k + 1) / 2 + k * (m - 1);
}

Eigen::MatrixXd translog_regressors(const Eigen::MatrixXd& ly, const Eigen::MatrixXd& lx) {
  const Eigen::Index rows = lx.rows();
  const Eigen::Index m = ly.cols();
  const Eigen::Index k = lx.cols();
  const Eigen::Index p = 1 + m + k + m * (m + 1) / 2 + k * (k + 1) / 2 + k * m;
  Eigen::MatrixXd z(rows, p);
  Eigen::Index col = 0;
  z.col(col++).setOnes();
  for (Eigen::Index a = 0; a < m; ++a) z.col(col++) = ly.col(a);
  for (Eigen::Index a = 0; a < k; ++a) z.col(col++) = lx.col(a);
  auto second_order = [&](const Eigen::MatrixXd& v) {
    for (Eigen::Index a = 0; a < v.cols(); ++a) z.col(col++) = 0.5 * v.col(a).array().square().matrix();
    for (Eigen::Index a = 0; a < v.cols(); ++a) {
      for (Eigen::Index b = a + 1; b < v.cols(); ++b) z.col(col++) = 0.5 * v.col(a).cwiseProduct(v.col(b));
    }
  };
  second_order(ly);
  second_order(lx);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) z.col(col++) = lx.col(a).cwiseProduct(ly.col(b));
  }
  return z;
}

std::vector<std::string> translog_names(const std::vector<std::string>& ratio_outputs,
                                        const std::vector<std::string>& inputs) {
  std::vector<std::string> ys;
  for (const auto& y : ratio_outputs) ys.push_back(y + "'");
  std::vector<std::string> names{"Constant"};
  names.insert(names.end(), ys.begin(), ys.end());
  names.insert(names.end(), inputs.begin(), inputs.end());
  auto second_order = [&](const std::vector<std::string>& v) {
    for (const auto& s : v) names.push_back(s + "2");
    for (std::size_t a = 0; a < v.size(); ++a) {
      for (std::size_t b = a + 1; b < v.size(); ++b) names.push_back(v[a] + " x " + v[b]);
    }
  };
  second_order(ys);
  second_order(inputs);
  for (const auto& x : inputs) {
    for (const auto& y : ys) names.push_back(x + " x " + y);
  }
  return names;
}

TranslogDesign build_design(const PanelDataset& panel, const FrontierSpec& spec) {
  spec.validate(panel);
  if (spec.outputs.size() < 2) throw Error(ErrorCode::InvalidArgument, "translog distance function needs at least two outputs");
  if (spec.inputs.empty()) throw Error(ErrorCode::InvalidArgument, "translog distance function needs at least one input");
  if (std::find(spec.outputs.begin(), spec.outputs.end(), spec.normalizing_output) == spec.outputs.end()) {
    throw Error(ErrorCode::InvalidArgument, "normalizing output '" + spec.normalizing_output + "' is not an output");
  }
  const auto rows = static_cast<Eigen::Index>(panel.n_obs());
  std::vector<std::string> ratio;
  for (const auto& y : spec.outputs) {
    if (y != spec.normalizing_output) ratio.push_back(y);
  }
  auto logs = [&](const std::string& name) {
    const auto col = panel.column(name);
    Eigen::VectorXd v(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double x = col[static_cast<std::size_t>(r)];
      if (!(x > 0)) throw Error(ErrorCode::NonPositiveQuantity, name + " must be positive to take logs");
      v[r] = std::log(x);
    }
    return v;
  };
  const Eigen::VectorXd ly_m = logs(spec.normalizing_output);
  Eigen::MatrixXd ly(rows, static_cast<Eigen::Index>(ratio.size()));
  for (std::size_t a = 0; a < ratio.size(); ++a) ly.col(static_cast<Eigen::Index>(a)) = logs(ratio[a]) - ly_m;
  Eigen::MatrixXd lx(rows, static_cast<Eigen::Index>(spec.inputs.size()));
  for (std::size_t a = 0; a < spec.inputs.size(); ++a) lx.col(static_cast<Eigen::Index>(a)) = logs(spec.inputs[a]);

  TranslogDesign d;
  d.response = -ly_m;
  d.regressors = translog_regressors(ly, lx);
  d.names = translog_names(ratio, spec.inputs);
  d.n_dmus = panel.n_dmus();
  d.n_periods = panel.n_periods();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.regressors);
  qr.setThreshold(1e-10);
  if (d.regressors.rows() < d.regressors.cols() || qr.rank() < d.regressors.cols()) {
    throw Error(ErrorCode::DegenerateDesign, "translog regressors have rank " + std::to_string(qr.rank()) + " < " +
                                                 std::to_string(d.regressors.cols()) + " columns");
  }
  return d;
}

Eigen::VectorXd to_transformed(const SfaParams& p, bool half_normal) {
  const Eigen::Index nb = p.beta.size();
  Eigen::VectorXd theta(nb + (half_normal ? 3 : 4));
  theta.head(nb) = p.beta;
  theta[nb] = std::log(p.sigma_sq);
  theta[nb + 1] = std::log(p.gamma / (1.0 - p.gamma));
  if (half_normal) {
    theta[nb + 2] = p.eta;
  } else {
    theta[nb + 2] = p.mu;
    theta[nb + 3] = p.eta;
  }
  return theta;
}

SfaParams from_transformed(const Eigen::VectorXd& theta, Eigen::Index nb, bool half_normal) {
  SfaParams p;
  p.beta = theta.head(nb);
  p.sigma_sq = std::exp(theta[nb]);
  p.gamma = logistic(theta[nb + 1]);
  p.mu = half_normal ? 0.0 : theta[nb + 2];
  p.eta = theta[nb + (half_normal ? 2 : 3)];
  return p;
}

double loglik(const SfaParams& p, const TranslogDesign& d) {
  check_structure(d);
  if (!(p.sigma_sq > 0) || !(p.gamma > 0) || !(p.gamma < 1)) {
    throw Error(ErrorCode::InvalidArgument, "need sigma_sq > 0 and 0 < gamma < 1");
  }
  const double v = evaluate(d, p.beta, {p.sigma_sq, p.gamma, 1.0 - p.gamma}, p.mu, p.eta, nullptr);
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "log-likelihood is not finite");
  return v;
}

double loglik_transformed(const Eigen::VectorXd& theta, const TranslogDesign& d, bool half_normal,
                          Eigen::VectorXd* gradient) {
  const Eigen::Index nb = d.regressors.cols();
  const Scales sc = scales_from_theta(theta, nb);
  const double mu = half_normal ? 0.0 : theta[nb + 2];
  const double eta = theta[nb + (half_normal ? 2 : 3)];
  Partials part;
  const double v = evaluate(d, theta.head(nb), sc, mu, eta, gradient ? &part : nullptr);
  if (gradient) {
    gradient->resize(theta.size());
    gradient->head(nb) = part.beta;
    const double d_sigma_sq = sc.one_minus_gamma * part.s_v + sc.gamma * part.s_u;
    const double d_gamma = sc.sigma_sq * (part.s_u - part.s_v);
    (*gradient)[nb] = d_sigma_sq * sc.sigma_sq;
    (*gradient)[nb + 1] = d_gamma * sc.gamma * sc.one_minus_gamma;
    if (half_normal) {
      (*gradient)[nb + 2] = part.eta;
    } else {
      (*gradient)[nb + 2] = part.mu;
      (*gradient)[nb + 3] = part.eta;
    }
  }
  return v;
}

Eigen::VectorXd grad_loglik(const SfaParams& p, const TranslogDesign& d, bool half_normal) {
  check_structure(d);
  Eigen::VectorXd g;
  const double v = loglik_transformed(to_transformed(p, half_normal), d, half_normal, &g);
  if (!std::isfinite(v) || !g.allFinite()) throw Error(ErrorCode::NonFinite, "gradient is not finite");
  return g;
}

std::vector<double> predict_te(const SfaParams& p, const TranslogDesign& d) {
  check_structure(d);
  const auto n = static_cast<Eigen::Index>(d.n_dmus);
  const auto t_len = static_cast<Eigen::Index>(d.n_periods);
  const double s_v = p.sigma_v_sq();
  const double s_u = p.sigma_u_sq();
  const Eigen::VectorXd eps = d.regressors * p.beta - d.response;
  Eigen::VectorXd h(t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) h[t] = std::exp(-p.eta * static_cast<double>(t + 1 - t_len));
  const double big_d = s_v + s_u * h.squaredNorm();
  const double sigma_star = std::sqrt(s_v * s_u / big_d);
  std::vector<double> te(static_cast<std::size_t>(n * t_len));
  const double below_one = std::nextafter(1.0, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double b = h.dot(eps.segment(i * t_len, t_len));
    const double mu_star = (p.mu * s_v - s_u * b) / big_d;
    const double r = mu_star / sigma_star;
    const double log_norm = normal::log_cdf(r);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      const double ht = h[t];
      const double log_te = normal::log_cdf(r - ht * sigma_star) - log_norm - ht * mu_star +
                            0.5 * ht * ht * sigma_star * sigma_star;
      te[static_cast<std::size_t>(i * t_len + t)] =
          std::clamp(std::exp(log_te), std::numeric_limits<double>::min(), below_one);
    }
  }
  return te;
}

Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return x.colPivHouseholderQr().solve(y);
}

namespace {

struct StartOutcome {
  BfgsResult result;
  bool ok = false;
};

}  // namespace

SfaFit fit_sfa(const TranslogDesign& original, const SfaOptions& options) {
  check_structure(original);
  if (options.starts < 1) throw Error(ErrorCode::InvalidArgument, "need at least one start");
  const Eigen::Index nb = original.regressors.cols();
  const bool hn = options.half_normal;

  // Optimize on centered, unit-variance regressors: X~ = X C, beta = C beta~.
  Eigen::MatrixXd c_map = Eigen::MatrixXd::Identity(nb, nb);
  {
    const Eigen::MatrixXd& x = original.regressors;
    const double rows = static_cast<double>(x.rows());
    Eigen::Index intercept = -1;
    for (Eigen::Index j = 0; j < nb; ++j) {
      if ((x.col(j).array() == 1.0).all()) {
        intercept = j;
        break;
      }
    }
    for (Eigen::Index j = 0; j < nb; ++j) {
      if (j == intercept) continue;
      const double m = x.col(j).mean();
      const double sd = std::sqrt((x.col(j).array() - m).square().sum() / rows);
      if (!(sd > 0.0)) continue;
      c_map(j, j) = 1.0 / sd;
      if (intercept >= 0) c_map(intercept, j) = -m / sd;
    }
  }
  TranslogDesign d = original;
  d.regressors = original.regressors * c_map;

  // OLS start; the intercept is shifted by E[u] under a half-normal with gamma = 0.5.
  const Eigen::VectorXd beta_ols = ols(d.regressors, d.response);
  const Eigen::VectorXd resid = d.response - d.regressors * beta_ols;
  const double n_obs = static_cast<double>(d.response.size());
  const double s2 = std::max(resid.squaredNorm() / n_obs, 1e-12);
  const double gamma0 = 0.5;
  SfaParams base;
  base.beta = beta_ols;
  base.sigma_sq = s2 / (1.0 - gamma0 * 2.0 / std::numbers::pi);
  base.gamma = gamma0;
  base.beta[0] -= std::sqrt(gamma0 * base.sigma_sq * 2.0 / std::numbers::pi);
  const Eigen::VectorXd theta0 = to_transformed(base, hn);

  const double dof = std::max(1.0, n_obs - static_cast<double>(nb));
  const Eigen::VectorXd ols_se =
      (resid.squaredNorm() / dof *
       (d.regressors.transpose() * d.regressors).ldlt().solve(Eigen::MatrixXd::Identity(nb, nb)).diagonal())
          .cwiseMax(0.0)
          .cwiseSqrt();

  std::vector<Eigen::VectorXd> starts(static_cast<std::size_t>(options.starts), theta0);
  for (int s = 1; s < options.starts; ++s) {
    CounterRng rng(options.seed, static_cast<std::uint64_t>(s));
    auto& th = starts[static_cast<std::size_t>(s)];
    for (Eigen::Index j = 0; j < nb; ++j) th[j] += rng.normal() * ols_se[j];
    th[nb] += 0.3 * rng.normal();
    th[nb + 1] += 1.5 * rng.normal();
    if (!hn) th[nb + 2] += 0.5 * std::sqrt(base.sigma_sq) * rng.normal();
    th[nb + (hn ? 2 : 3)] += 0.05 * rng.normal();
  }

  const Objective f = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g) {
    return loglik_transformed(th, d, hn, g);
  };
  BfgsOptions bopt;
  bopt.max_iterations = options.max_iterations;
  bopt.gradient_tolerance = options.gradient_tolerance;
  bopt.relative_tolerance = options.relative_tolerance;

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(
      starts.size(),
      [&](std::size_t s) {
        BfgsResult r = maximize_bfgs(f, starts[s], bopt);
        if (std::isfinite(r.value) && r.gradient_norm < 1e-2) newton_refine(f, r, options.gradient_tolerance);
        outcomes[s].ok = std::isfinite(r.value) && r.gradient_norm < options.gradient_tolerance;
        outcomes[s].result = std::move(r);
      },
      options.threads);

  int converged = 0;
  const StartOutcome* best = nullptr;
  const StartOutcome* best_any = nullptr;
  for (const auto& o : outcomes) {
    if (std::isfinite(o.result.value) && (!best_any || o.result.value > best_any->result.value)) best_any = &o;
    if (!o.ok) continue;
    ++converged;
    if (!best || o.result.value > best->result.value) best = &o;
  }
  if (!best) {
    std::string msg = "no start reached gradient norm < " + fmt(options.gradient_tolerance) + " (" +
                      std::to_string(options.starts) + " starts";
    if (best_any) {
      msg += "; best log-likelihood " + fmt(best_any->result.value) + ", gradient norm " +
             fmt(best_any->result.gradient_norm) + " after " + std::to_string(best_any->result.iterations) +
             " iterations";
    }
    throw Error(ErrorCode::NonConvergence, msg + ")");
  }

  const BfgsResult& r = best->result;
  SfaFit fit;
  fit.params = from_transformed(r.x, nb, hn);
  fit.params.beta = c_map * fit.params.beta;
  fit.log_likelihood = r.value;
  fit.n_obs = static_cast<std::size_t>(original.response.size());
  fit.convergence = {r.iterations, r.gradient_norm, options.starts, converged, r.trace};

  fit.names = original.names;
  for (const char* s : {"sigma_sq", "gamma", "mu", "eta"}) fit.names.emplace_back(s);
  fit.estimates.resize(nb + 4);
  fit.estimates.head(nb) = fit.params.beta;
  fit.estimates.tail(4) << fit.params.sigma_sq, fit.params.gamma, fit.params.mu, fit.params.eta;

  fit.std_errors = Eigen::VectorXd::Constant(nb + 4, kNaN);
  const Eigen::MatrixXd hess = numeric_hessian(f, r.x);
  Eigen::LDLT<Eigen::MatrixXd> info(-hess);
  if (info.info() == Eigen::Success && info.isPositive() && (info.vectorD().array() > 0).all()) {
    const Eigen::MatrixXd cov = info.solve(Eigen::MatrixXd::Identity(hess.rows(), hess.cols()));
    const Eigen::VectorXd se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd cov_beta = c_map * cov.topLeftCorner(nb, nb) * c_map.transpose();
    fit.std_errors.head(nb) = cov_beta.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.std_errors[nb] = se[nb] * fit.params.sigma_sq;
    fit.std_errors[nb + 1] = se[nb + 1] * fit.params.gamma * (1.0 - fit.params.gamma);
    if (!hn) fit.std_errors[nb + 2] = se[nb + 2];
    fit.std_errors[nb + 3] = se[nb + (hn ? 2 : 3)];
  }
  fit.te = predict_te(fit.params, original);
  return fit;
}

}  // namespace effbench

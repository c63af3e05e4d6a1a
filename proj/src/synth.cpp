#include "effbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "effbench/error.hpp"
#include "effbench/normal.hpp"
#include "effbench/rng.hpp"

namespace effbench {

namespace {

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  const int width = n < 10 ? 1 : n < 100 ? 2 : n < 1000 ? 3 : 6;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix.c_str(), width, i + 1);
    out.emplace_back(buf);
  }
  return out;
}

std::vector<int> period_labels(std::size_t t) {
  std::vector<int> out(t);
  for (std::size_t i = 0; i < t; ++i) out[i] = static_cast<int>(i + 1);
  return out;
}

VariableInfo quantity(const std::string& name, Role role) {
  VariableInfo v;
  v.name = name;
  v.role = role;
  return v;
}

double log_uniform(CounterRng& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }

constexpr std::uint64_t kDmuStreamBase = 0x100000;

}  // namespace

void SynthSpec::validate() const {
  if (n_dmus == 0 || n_periods == 0 || n_outputs < 2 || n_inputs == 0) {
    throw Error(ErrorCode::InvalidArgument, "synthetic panel needs N, T, K >= 1 and M >= 2");
  }
  if (!(sigma_v > 0) || !(sigma_u > 0)) throw Error(ErrorCode::InvalidArgument, "sigma_v and sigma_u must be positive");
  if (!(input_lo > 0) || !(input_lo < input_hi) || !(ratio_lo > 0) || !(ratio_lo < ratio_hi)) {
    throw Error(ErrorCode::InvalidArgument, "log-uniform bounds must satisfy 0 < lo < hi");
  }
  if (beta.size() != 0 && static_cast<std::size_t>(beta.size()) != translog_size(n_outputs, n_inputs)) {
    throw Error(ErrorCode::InvalidArgument, "beta has " + std::to_string(beta.size()) + " entries, expected " +
                                                std::to_string(translog_size(n_outputs, n_inputs)));
  }
}

Eigen::VectorXd default_translog_beta(std::size_t n_outputs, std::size_t n_inputs) {
  const auto m = static_cast<Eigen::Index>(n_outputs - 1);
  const auto k = static_cast<Eigen::Index>(n_inputs);
  Eigen::VectorXd b(static_cast<Eigen::Index>(translog_size(n_outputs, n_inputs)));
  Eigen::Index c = 0;
  b[c++] = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) b[c++] = 0.3 / static_cast<double>(m);
  for (Eigen::Index i = 0; i < k; ++i) b[c++] = -0.6 / static_cast<double>(k);
  for (Eigen::Index i = 0; i < m; ++i) b[c++] = 0.05;
  for (Eigen::Index i = 0; i < m * (m - 1) / 2; ++i) b[c++] = -0.02;
  for (Eigen::Index i = 0; i < k; ++i) b[c++] = -0.04;
  for (Eigen::Index i = 0; i < k * (k - 1) / 2; ++i) b[c++] = 0.02;
  for (Eigen::Index i = 0; i < k * m; ++i) b[c++] = 0.01;
  return b;
}

double draw_positive_normal(double mu, double sigma, CounterRng& rng) {
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const double u = rng.normal(mu, sigma);
    if (u >= 0) return u;
  }
  throw Error(ErrorCode::RejectionStall, "positive-normal acceptance below 1e-6");
}

SynthPanel gen_sfa_panel(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_dmus;
  const std::size_t t_len = spec.n_periods;
  const auto m1 = static_cast<Eigen::Index>(spec.n_outputs - 1);
  const auto k = static_cast<Eigen::Index>(spec.n_inputs);
  const Eigen::VectorXd beta = spec.beta.size() ? spec.beta : default_translog_beta(spec.n_outputs, spec.n_inputs);

  const auto outputs = numbered("y", spec.n_outputs);
  const auto inputs = numbered("x", spec.n_inputs);
  std::map<std::string, std::vector<double>> values;
  for (const auto& s : outputs) values[s].resize(n * t_len);
  for (const auto& s : inputs) values[s].resize(n * t_len);
  std::vector<double> te(n * t_len);

  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(spec.seed, kDmuStreamBase + i);
    const double u_i = draw_positive_normal(spec.mu, spec.sigma_u, rng);
    Eigen::MatrixXd ly(static_cast<Eigen::Index>(t_len), m1);
    Eigen::MatrixXd lx(static_cast<Eigen::Index>(t_len), k);
    Eigen::VectorXd v(static_cast<Eigen::Index>(t_len));
    for (std::size_t t = 0; t < t_len; ++t) {
      const auto r = static_cast<Eigen::Index>(t);
      for (Eigen::Index a = 0; a < m1; ++a) ly(r, a) = std::log(log_uniform(rng, spec.ratio_lo, spec.ratio_hi));
      for (Eigen::Index a = 0; a < k; ++a) lx(r, a) = std::log(log_uniform(rng, spec.input_lo, spec.input_hi));
      v[r] = rng.normal(0.0, spec.sigma_v);
    }
    const Eigen::VectorXd tl = translog_regressors(ly, lx) * beta;
    for (std::size_t t = 0; t < t_len; ++t) {
      const auto r = static_cast<Eigen::Index>(t);
      const double u_it = std::exp(-spec.eta * (static_cast<double>(t + 1) - static_cast<double>(t_len))) * u_i;
      const double ln_ym = -tl[r] + v[r] - u_it;
      const std::size_t row = i * t_len + t;
      values[outputs[0]][row] = std::exp(ln_ym);
      for (Eigen::Index a = 0; a < m1; ++a) {
        values[outputs[static_cast<std::size_t>(a) + 1]][row] = std::exp(ly(r, a) + ln_ym);
      }
      for (Eigen::Index a = 0; a < k; ++a) values[inputs[static_cast<std::size_t>(a)]][row] = std::exp(lx(r, a));
      te[row] = std::exp(-u_it);
    }
  }

  std::vector<VariableInfo> vars;
  for (const auto& s : outputs) vars.push_back(quantity(s, Role::Output));
  for (const auto& s : inputs) vars.push_back(quantity(s, Role::Input));

  SynthPanel out{PanelDataset(numbered("D", n), period_labels(t_len), std::move(vars), std::move(values)),
                 FrontierSpec{outputs, inputs, outputs[0], ReturnsToScale::Variable},
                 SfaParams{},
                 std::move(te)};
  const double su2 = spec.sigma_u * spec.sigma_u;
  const double sv2 = spec.sigma_v * spec.sigma_v;
  out.truth.beta = beta;
  out.truth.sigma_sq = su2 + sv2;
  out.truth.gamma = su2 / (su2 + sv2);
  out.truth.mu = spec.mu;
  out.truth.eta = spec.eta;
  return out;
}

DeaSynthPanel gen_dea_panel(const DeaSynthSpec& spec) {
  if (spec.n_dmus < 2 || spec.n_periods == 0 || spec.n_outputs == 0 || spec.n_inputs == 0) {
    throw Error(ErrorCode::InvalidArgument, "DEA generator needs N >= 2 and positive T, M, K");
  }
  if (!(0 < spec.theta_lo && spec.theta_lo <= spec.theta_hi && spec.theta_hi <= 1.0) ||
      !(0 < spec.scale_lo && spec.scale_lo < spec.scale_hi)) {
    throw Error(ErrorCode::InvalidArgument, "DEA generator bounds must satisfy 0 < lo <= hi");
  }
  const std::size_t n = spec.n_dmus;
  const std::size_t t_len = spec.n_periods;
  if (!spec.theta.empty()) {
    if (spec.theta.size() != n * t_len) throw Error(ErrorCode::InvalidArgument, "theta must hold N*T scores");
    for (double v : spec.theta) {
      if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidArgument, "theta values must lie in (0, 1]");
    }
  }
  const std::size_t nf = std::clamp<std::size_t>(spec.n_frontier, 2, n);
  const auto outputs = numbered("y", spec.n_outputs);
  const auto inputs = numbered("x", spec.n_inputs);

  CounterRng mix_rng(spec.seed, 0);
  std::vector<double> in_mix(spec.n_inputs);
  std::vector<double> out_mix(spec.n_outputs);
  for (auto& a : in_mix) a = mix_rng.uniform(0.5, 2.0);
  for (auto& b : out_mix) b = mix_rng.uniform(0.5, 2.0);

  std::map<std::string, std::vector<double>> values;
  for (const auto& s : outputs) values[s].resize(n * t_len);
  for (const auto& s : inputs) values[s].resize(n * t_len);
  std::vector<double> theta(n * t_len, 1.0);

  auto frontier_output = [](double s) { return std::pow(s, 0.6); };
  for (std::size_t t = 0; t < t_len; ++t) {
    CounterRng rng(spec.seed, 1 + t);
    // Distinct frontier scales so adjacent segments are well defined.
    std::vector<double> scales(nf);
    for (std::size_t j = 0; j < nf; ++j) {
      const double lo = spec.scale_lo + (spec.scale_hi - spec.scale_lo) * static_cast<double>(j) / nf;
      const double hi = spec.scale_lo + (spec.scale_hi - spec.scale_lo) * static_cast<double>(j + 1) / nf;
      scales[j] = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo));
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      double y_scale = 0.0;
      if (i < nf) {
        s = scales[i];
        y_scale = frontier_output(s);
      } else {
        const std::size_t seg = static_cast<std::size_t>(rng() % (nf - 1));
        const double w = rng.uniform(0.0, 1.0);
        s = w * scales[seg] + (1.0 - w) * scales[seg + 1];
        const double drawn = spec.theta_lo == spec.theta_hi ? spec.theta_lo : rng.uniform(spec.theta_lo, spec.theta_hi);
        const double th = spec.theta.empty() ? drawn : spec.theta[i * t_len + t];
        y_scale = th * (w * frontier_output(scales[seg]) + (1.0 - w) * frontier_output(scales[seg + 1]));
        theta[i * t_len + t] = th;
      }
      for (std::size_t a = 0; a < inputs.size(); ++a) values[inputs[a]][i * t_len + t] = s * in_mix[a];
      for (std::size_t b = 0; b < outputs.size(); ++b) values[outputs[b]][i * t_len + t] = y_scale * out_mix[b];
    }
  }

  std::vector<VariableInfo> vars;
  for (const auto& s : outputs) vars.push_back(quantity(s, Role::Output));
  for (const auto& s : inputs) vars.push_back(quantity(s, Role::Input));
  return {PanelDataset(numbered("D", n), period_labels(t_len), std::move(vars), std::move(values)),
          FrontierSpec{outputs, inputs, outputs[0], ReturnsToScale::Variable}, std::move(theta)};
}

std::vector<double> gen_truncated_scores(const Eigen::MatrixXd& z, const Eigen::VectorXd& delta, double sigma,
                                         std::uint64_t seed) {
  if (z.cols() != delta.size()) throw Error(ErrorCode::InvalidArgument, "Z and delta disagree in width");
  if (!(sigma > 0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const Eigen::VectorXd mean = z * delta;
  std::vector<double> out(static_cast<std::size_t>(z.rows()));
  double attempts = 0.0;
  double accepted = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    while (true) {
      attempts += 1.0;
      const double th = mean[i] + sigma * rng.normal();
      if (th <= 1.0) {
        accepted += 1.0;
        out[static_cast<std::size_t>(i)] = th;
        break;
      }
      if (attempts >= 1e4 && accepted / attempts < 1e-4) {
        throw Error(ErrorCode::RejectionStall, "truncated-normal acceptance rate below 1e-4 at row " +
                                                   std::to_string(i));
      }
    }
  }
  return out;
}

std::vector<double> gen_censored_scores(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta, double sigma,
                                        std::uint64_t seed) {
  if (z.cols() != beta.size()) throw Error(ErrorCode::InvalidArgument, "Z and beta disagree in width");
  const Eigen::VectorXd mean = z * beta;
  std::vector<double> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = std::clamp(mean[i] + sigma * rng.normal(), 0.0, 1.0);
  }
  return out;
}


namespace {

// Reference means of the output and input columns.
const std::map<std::string, double>& reference_means() {
  static const std::map<std::string, double> m = {{"ATM", 47669.78}, {"SIZE", 73.66409}, {"NAR", 17.92023},
                                                  {"EMP", 9.548649}, {"RUNW", 3534.414}, {"TERM", 90938.5}};
  return m;
}

// Fisher-Yates with one uniform per swap, identical across standard libraries.
void shuffle(std::vector<std::size_t>& v, CounterRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

AenaSample gen_aena_sample(const AenaSpec& spec) {
  const std::size_t n = spec.n_airports;
  const std::size_t t_len = spec.n_years;
  if (n < 4 || t_len < 1) throw Error(ErrorCode::InvalidArgument, "need at least 4 airports and 1 year");
  if (!(spec.sigma_u > 0) || !(spec.sigma_v > 0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma_u and sigma_v must be positive");
  }
  const std::size_t n_obs = n * t_len;
  CounterRng layout(spec.seed, 0);

  // Airport scale on stratified normal quantiles, randomly assigned.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, layout);
  std::vector<double> ln_s(n);
  for (std::size_t k = 0; k < n; ++k) {
    ln_s[order[k]] = 1.15 * normal::quantile((static_cast<double>(k) + 0.5) / static_cast<double>(n));
  }
  std::vector<std::size_t> by_size(n);
  for (std::size_t i = 0; i < n; ++i) by_size[i] = i;
  std::sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) { return ln_s[a] > ln_s[b]; });

  // Airport categories.
  std::vector<double> hub(n, 0.0), isle(n, 0.0), tour(n, 0.0), cong(n, 0.0), hsr_from(n, 1e9);
  hub[by_size[0]] = hub[by_size[1]] = 1.0;
  std::vector<std::size_t> rest(by_size.begin() + 2, by_size.end());
  std::vector<std::size_t> shuffled = rest;
  shuffle(shuffled, layout);
  const std::size_t n_isle = std::min<std::size_t>(rest.size(), (n * 11 + 19) / 38);
  for (std::size_t k = 0; k < n_isle; ++k) isle[shuffled[k]] = 1.0;
  std::size_t n_tour = (n * 14 + 19) / 38;
  std::size_t isle_tour = std::min(n_tour, (n_isle * 8 + 5) / 11);
  for (std::size_t idx : rest) {  // largest islands first
    if (isle_tour == 0) break;
    if (isle[idx] > 0.0) {
      tour[idx] = 1.0;
      --isle_tour;
      --n_tour;
    }
  }
  for (std::size_t idx : rest) {  // then the largest mainland airports
    if (n_tour == 0) break;
    if (isle[idx] == 0.0 && tour[idx] == 0.0) {
      tour[idx] = 1.0;
      --n_tour;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (isle[i] > 0.0) {
      const double r = layout.uniform();
      cong[i] = r < 0.4 ? 0.0 : r < 0.8 ? 1.0 : 2.0;
    } else {
      cong[i] = 1.0;
      for (int k = 0; k < 4; ++k) cong[i] += layout.uniform() < 0.2 ? 1.0 : 0.0;
    }
  }
  std::vector<std::size_t> mainland;
  for (std::size_t i = 0; i < n; ++i) {
    if (isle[i] == 0.0) mainland.push_back(i);
  }
  shuffle(mainland, layout);
  const std::size_t n_hsr = std::min(mainland.size(), (n * 8 + 19) / 38);
  for (std::size_t k = 0; k < n_hsr; ++k) hsr_from[mainland[k]] = k + 1 == n_hsr ? static_cast<double>(t_len / 2) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (hub[i] > 0.0) hsr_from[i] = 0.0;
  }

  // Frontier: ln D = a0 + 0.4 ln ATM + 0.3 ln SIZE + 0.3 ln NAR - 0.45 ln EMP - 0.15 ln RUNW - 0.35 ln TERM.
  const double w_out[3] = {0.4, 0.3, 0.3};
  const double w_in[3] = {-0.45, -0.15, -0.35};
  const double a0 = 0.0;

  std::map<std::string, std::vector<double>> col;
  for (const char* name : {"ATM", "SIZE", "NAR", "EMP", "RUNW", "TERM", "ISLE", "HUB", "TOUR", "CONG", "LCC", "SUB",
                           "HSR", "HH"}) {
    col[name].assign(n_obs, 0.0);
  }
  std::vector<double> te(n_obs);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(spec.seed, 0x200000 + i);
    const double e_emp = rng.normal(0.0, 0.15);
    const double ln_runw = 0.55 * ln_s[i] + rng.normal(0.0, 0.2);
    const double ln_term = 1.2 * ln_s[i] + rng.normal(0.0, 0.2);
    const double e_atm = rng.normal(0.0, 0.1);
    const double e_size = rng.normal(0.0, 0.25);
    const double e_nar = rng.normal(0.0, 0.2);
    const double mu_i = 0.15 + 0.10 * isle[i] + 0.15 * hub[i] - 0.05 * tour[i] + 0.04 * (cong[i] - 1.5);
    const double u_i = draw_positive_normal(mu_i, spec.sigma_u, rng);
    const double lcc_p = rng.uniform() < 0.6 ? 0.9 : 0.15;
    const double ln_hh = std::log(2700.0) + rng.normal(0.0, 0.6);
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::size_t r = i * t_len + t;
      const double ln_x[3] = {0.9 * ln_s[i] + e_emp + rng.normal(0.0, 0.03), ln_runw, ln_term};
      const double ln_y0[3] = {ln_s[i] + e_atm + rng.normal(0.0, 0.03), 0.3 * ln_s[i] + e_size + rng.normal(0.0, 0.03),
                               1.15 * ln_s[i] + e_nar + rng.normal(0.0, 0.03)};
      const double u_it = std::exp(-spec.eta * (static_cast<double>(t + 1) - static_cast<double>(t_len))) * u_i;
      const double v_it = rng.normal(0.0, spec.sigma_v);
      double ln_d0 = a0;
      for (int m = 0; m < 3; ++m) ln_d0 += w_out[m] * ln_y0[m];
      for (int k = 0; k < 3; ++k) ln_d0 += w_in[k] * ln_x[k];
      // Radial scaling so that ln D(x, y) = v - u.
      const double ln_lambda = v_it - u_it - ln_d0;
      col["ATM"][r] = std::exp(ln_y0[0] + ln_lambda);
      col["SIZE"][r] = std::exp(ln_y0[1] + ln_lambda);
      col["NAR"][r] = std::exp(ln_y0[2] + ln_lambda);
      col["EMP"][r] = std::exp(ln_x[0]);
      col["RUNW"][r] = std::exp(ln_x[1]);
      col["TERM"][r] = std::exp(ln_x[2]);
      te[r] = std::exp(-u_it);
      col["ISLE"][r] = isle[i];
      col["HUB"][r] = hub[i];
      col["TOUR"][r] = tour[i];
      col["CONG"][r] = cong[i];
      col["HSR"][r] = static_cast<double>(t) >= hsr_from[i] ? 1.0 : 0.0;
      col["LCC"][r] = rng.uniform() < lcc_p ? 1.0 : 0.0;
      col["SUB"][r] = std::exp(rng.normal(-0.25, 1.0)) - 0.25;
      col["HH"][r] = std::clamp(std::exp(ln_hh + rng.normal(0.0, 0.1)), 300.0, 9800.0);
    }
  }
  // Column rescaling only moves the Cobb-Douglas intercept; TE is unchanged.
  for (const auto& [name, target] : reference_means()) {
    auto& v = col[name];
    const double f = target / mean_of(v);
    for (double& x : v) x *= f;
  }
  std::vector<double> pax(n_obs), ebitda(n_obs), narpax(n_obs);
  for (std::size_t r = 0; r < n_obs; ++r) {
    CounterRng rng(spec.seed, 0x300000 + r);
    pax[r] = col["SIZE"][r] * col["ATM"][r];
    narpax[r] = col["NAR"][r] * 1e6 / pax[r];
    ebitda[r] = 2.4 * col["NAR"][r] - 0.8 * col["EMP"][r] - 4.0 + rng.normal(0.0, 0.5);
  }

  std::vector<std::string> dmus = numbered("AP", n);
  std::vector<int> years(t_len);
  for (std::size_t t = 0; t < t_len; ++t) years[t] = spec.first_year + static_cast<int>(t);
  auto info = [](const std::string& name, Role role, std::string units, bool deflated = false,
                 CovariateKind kind = CovariateKind::Continuous) {
    VariableInfo v{name, role, std::move(units), deflated, kind, {}, {}};
    return v;
  };
  std::vector<VariableInfo> vars = {
      info("ATM", Role::Output, "movements"),
      info("SIZE", Role::Output, "passengers per movement"),
      info("NAR", Role::Output, "million EUR", true),
      info("EMP", Role::Input, "million EUR", true),
      info("RUNW", Role::Input, "meters"),
      info("TERM", Role::Input, "square meters"),
      info("PAX", Role::Covariate, "passengers"),
      info("ISLE", Role::Covariate, "", false, CovariateKind::Dummy),
      info("HUB", Role::Covariate, "", false, CovariateKind::Dummy),
      info("TOUR", Role::Covariate, "", false, CovariateKind::Dummy),
      info("CONG", Role::Covariate, "airports", false, CovariateKind::Count),
      info("LCC", Role::Covariate, "", false, CovariateKind::Dummy),
      info("SUB", Role::Covariate, "million EUR", true),
      info("EBITDA", Role::Covariate, "million EUR", true),
      info("HSR", Role::Covariate, "", false, CovariateKind::Dummy),
      info("HH", Role::Covariate, "index"),
      info("NARPAX", Role::Covariate, "EUR per passenger"),
  };
  vars[15].lower = 0.0;
  vars[15].upper = 10000.0;
  std::map<std::string, std::vector<double>> values = std::move(col);
  values["PAX"] = pax;
  values["EBITDA"] = ebitda;
  values["NARPAX"] = narpax;

  AenaSample out{PanelDataset(dmus, years, vars, std::move(values)),
                 FrontierSpec{{"ATM", "SIZE", "NAR"}, {"EMP", "RUNW", "TERM"}, "ATM", ReturnsToScale::Variable},
                 {"ISLE", "HUB", "TOUR", "CONG", "LCC", "SUB", "EBITDA", "HSR", "HH"},
                 {},
                 std::move(te)};
  // Mild synthetic inflation path; base year = 1.
  const double steps[] = {0.0, 0.024, 0.015, -0.002, 0.0, 0.012, 0.02};
  double level = 1.0;
  for (std::size_t t = 0; t < t_len; ++t) {
    level *= 1.0 + steps[std::min<std::size_t>(t, 6)];
    out.price_index[years[t]] = level;
  }
  return out;
}

}  // namespace effbench

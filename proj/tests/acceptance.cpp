// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "effbench/dea.hpp"
#include "effbench/error.hpp"
#include "effbench/report.hpp"
#include "effbench/rng.hpp"
#include "effbench/second_stage.hpp"
#include "effbench/sfa.hpp"
#include "effbench/synth.hpp"
#include "oracles.hpp"

using namespace effbench;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

PanelDataset cross_section(const std::vector<std::vector<double>>& y, const std::vector<std::vector<double>>& x) {
  std::vector<std::string> dmus;
  for (std::size_t i = 0; i < y.size(); ++i) dmus.push_back("D" + std::to_string(i));
  std::vector<VariableInfo> vars;
  std::map<std::string, std::vector<double>> values;
  auto add = [&](const std::string& name, Role role, const std::vector<std::vector<double>>& m, std::size_t c) {
    vars.push_back({name, role});
    std::vector<double> col;
    for (const auto& row : m) col.push_back(row[c]);
    values[name] = col;
  };
  for (std::size_t c = 0; c < y[0].size(); ++c) add("y" + std::to_string(c + 1), Role::Output, y, c);
  for (std::size_t c = 0; c < x[0].size(); ++c) add("x" + std::to_string(c + 1), Role::Input, x, c);
  return PanelDataset(dmus, {2011}, vars, values);
}

FrontierSpec spec_for(const PanelDataset& p, ReturnsToScale rts = ReturnsToScale::Variable) {
  FrontierSpec s;
  s.outputs = p.names_with_role(Role::Output);
  s.inputs = p.names_with_role(Role::Input);
  s.normalizing_output = s.outputs.front();
  s.returns_to_scale = rts;
  return s;
}

std::vector<std::vector<double>> random_matrix(CounterRng& rng, int n, int cols) {
  std::vector<std::vector<double>> m(n, std::vector<double>(cols));
  for (auto& row : m) {
    for (auto& v : row) v = rng.uniform(1, 10);
  }
  return m;
}

CovariateMatrix uniform_covariates(Eigen::Index n, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  Eigen::MatrixXd cols(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    cols(i, 0) = rng.uniform();
    cols(i, 1) = rng.uniform();
  }
  return CovariateMatrix({"z1", "z2"}, {CovariateKind::Continuous, CovariateKind::Continuous}, cols);
}

// Largest |mean - truth| / (sd / sqrt(R)) over the parameters.
double worst_mc_z(const std::vector<Eigen::VectorXd>& est, const Eigen::VectorXd& truth) {
  const auto reps = static_cast<double>(est.size());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    double m = 0.0;
    for (const auto& e : est) m += e[j];
    m /= reps;
    double v = 0.0;
    for (const auto& e : est) v += (e[j] - m) * (e[j] - m);
    const double se = std::sqrt(v / (reps - 1.0) / reps);
    worst = std::max(worst, std::fabs(m - truth[j]) / se);
  }
  return worst;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome dea_oracle() {
  const auto t0 = Clock::now();
  CounterRng rng(4242);
  double worst = 0.0;
  int instances = 0;
  for (; instances < 60; ++instances) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const auto y = random_matrix(rng, n, 1);
    const auto x = random_matrix(rng, n, 1);
    const auto p = cross_section(y, x);
    const auto table = dea_all(p, spec_for(p));
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
      xs.push_back(x[i][0]);
      ys.push_back(y[i][0]);
    }
    for (int i = 0; i < n; ++i) {
      const double want = 1.0 / oracle::dea_vrs_phi_grid(xs, ys, static_cast<std::size_t>(i));
      worst = std::max(worst, std::fabs(table.cells[static_cast<std::size_t>(i)].score - want));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 2e-3 && secs < 10.0, std::to_string(instances) + " instances, max |diff| " + fmt("%.2e", worst) +
                                            ", " + fmt("%.2f", secs) + " s"};
}

Outcome dea_hand_case() {
  const auto p = cross_section({{1}, {4}, {3}}, {{1}, {2}, {3}});
  const auto t = dea_all(p, spec_for(p));
  const double want[] = {1.0, 1.0, 0.75};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, std::fabs(t.cells[static_cast<std::size_t>(i)].score - want[i]));
  return {worst <= 1e-6, "scores " + fmt("%.6f", t.cells[0].score) + ", " + fmt("%.6f", t.cells[1].score) + ", " +
                             fmt("%.6f", t.cells[2].score)};
}

Outcome dea_properties() {
  CounterRng rng(77);
  double units = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = cross_section(random_matrix(rng, 6, 2), random_matrix(rng, 6, 2));
    const auto base = dea_all(p, spec_for(p));
    for (const auto& name : {"y1", "y2", "x1", "x2"}) {
      const double c = std::exp(rng.uniform(-6, 6));
      std::vector<double> col(p.column(name).begin(), p.column(name).end());
      for (auto& v : col) v *= c;
      const auto q = p.with_variable(p.variable(name), col);
      const auto scaled = dea_all(q, spec_for(q));
      for (std::size_t i = 0; i < base.cells.size(); ++i) {
        units = std::max(units, std::fabs(scaled.cells[i].score - base.cells[i].score));
      }
    }
  }
  int vrs_below = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8);
    const auto p = cross_section(random_matrix(rng, n, 1 + static_cast<int>(rng() % 3)),
                                 random_matrix(rng, n, 1 + static_cast<int>(rng() % 3)));
    const auto vrs = dea_all(p, spec_for(p, ReturnsToScale::Variable));
    const auto crs = dea_all(p, spec_for(p, ReturnsToScale::Constant));
    for (std::size_t c = 0; c < vrs.cells.size(); ++c) vrs_below += vrs.cells[c].score < crs.cells[c].score - 1e-9;
  }
  double inserted = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    auto y = random_matrix(rng, 5, 2);
    auto x = random_matrix(rng, 5, 2);
    const auto base = dea_all(cross_section(y, x), spec_for(cross_section(y, x)));
    const auto src = rng() % 5;
    y.push_back({y[src][0] * rng.uniform(0.3, 1.0), y[src][1] * rng.uniform(0.3, 1.0)});
    x.push_back({x[src][0] * rng.uniform(1.0, 2.0), x[src][1] * rng.uniform(1.0, 2.0)});
    const auto p = cross_section(y, x);
    const auto grown = dea_all(p, spec_for(p));
    for (std::size_t i = 0; i < 5; ++i) inserted = std::max(inserted, std::fabs(grown.cells[i].score - base.cells[i].score));
  }
  return {units < 1e-9 && vrs_below == 0 && inserted < 1e-9,
          "units max |diff| " + fmt("%.1e", units) + ", VRS < CRS in " + std::to_string(vrs_below) +
              " cells of 100 panels, insertion max |diff| " + fmt("%.1e", inserted)};
}

Outcome sfa_recovery() {
  const int reps = 100;
  std::vector<Eigen::VectorXd> est;
  std::vector<double> times;
  Eigen::VectorXd truth;
  int failures = 0;
  for (int r = 0; r < reps; ++r) {
    SynthSpec s;
    s.n_dmus = 50;
    s.n_periods = 6;
    s.sigma_v = 0.1;
    s.sigma_u = 0.3;
    s.mu = 0.2;
    s.eta = 0.05;
    s.seed = 1000 + static_cast<std::uint64_t>(r);
    const auto sy = gen_sfa_panel(s);
    const auto d = build_design(sy.panel, sy.frontier);
    truth.resize(sy.truth.beta.size() + 4);
    truth << sy.truth.beta, sy.truth.sigma_sq, sy.truth.gamma, sy.truth.mu, sy.truth.eta;
    const auto t0 = Clock::now();
    try {
      est.push_back(fit_sfa(d).estimates);
    } catch (const Error&) {
      ++failures;
    }
    times.push_back(seconds_since(t0));
  }
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  const double worst = est.size() > 2 ? worst_mc_z(est, truth) : INFINITY;
  return {failures == 0 && worst <= 3.0 && median < 5.0,
          std::to_string(reps) + " reps, " + std::to_string(truth.size()) + " parameters, worst |bias|/MC SE " +
              fmt("%.2f", worst) + ", failed fits " + std::to_string(failures) + ", median fit " +
              fmt("%.3f", median) + " s"};
}

Outcome gradient_check() {
  SynthSpec s;
  s.n_dmus = 40;
  s.n_periods = 5;
  s.mu = 0.1;
  s.eta = 0.05;
  s.seed = 13;
  const auto sy = gen_sfa_panel(s);
  const auto d = build_design(sy.panel, sy.frontier);
  CounterRng rng(2020);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    SfaParams p = sy.truth;
    for (Eigen::Index j = 0; j < p.beta.size(); ++j) p.beta[j] += rng.normal(0.0, 0.02);
    p.sigma_sq *= std::exp(rng.normal(0.0, 0.3));
    p.gamma = rng.uniform(0.2, 0.95);
    p.mu = rng.uniform(-0.3, 0.6);
    p.eta = rng.uniform(-0.1, 0.1);
    const Eigen::VectorXd theta = to_transformed(p);
    const Eigen::VectorXd g = grad_loglik(p, d);
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      auto central = [&](double step) {
        Eigen::VectorXd up = theta, dn = theta;
        up[j] += step;
        dn[j] -= step;
        return (loglik_transformed(up, d, false, nullptr) - loglik_transformed(dn, d, false, nullptr)) / (2.0 * step);
      };
      // Richardson-extrapolated central differences
      const double fd = (4.0 * central(5e-5) - central(1e-4)) / 3.0;
      worst = std::max(worst, std::fabs(g[j] - fd) / std::max(1.0, std::fabs(fd)));
    }
  }
  return {worst <= 1e-6, "20 points, 25 components, max relative difference " + fmt("%.2e", worst)};
}

Outcome bc92_structure() {
  SynthSpec s;
  s.n_dmus = 50;
  s.n_periods = 6;
  s.sigma_u = 0.3;
  s.mu = 0.2;
  s.eta = -0.05;
  s.seed = 61;
  const auto sy = gen_sfa_panel(s);
  const auto fit = fit_sfa(build_design(sy.panel, sy.frontier));
  const std::size_t n = s.n_dmus, t_len = s.n_periods;
  const auto& te = fit.te;
  int rank_breaks = 0;
  int trend_mismatch = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 1; t < t_len; ++t) {
      const double diff = te[i * t_len + t] - te[i * t_len + t - 1];
      trend_mismatch += !(std::signbit(diff) == std::signbit(fit.params.eta) && diff != 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t t = 1; t < t_len; ++t) {
        rank_breaks += (te[i * t_len] < te[j * t_len]) != (te[i * t_len + t] < te[j * t_len + t]);
      }
    }
  }
  ScoreTable scores{sy.panel.dmus(), sy.panel.periods(), te};
  return {rank_breaks == 0 && trend_mismatch == 0 && fit.params.eta < 0.0,
          "eta_hat " + fmt("%.4f", fit.params.eta) + " (true -0.05), rank changes " + std::to_string(rank_breaks) +
              ", trend sign mismatches " + std::to_string(trend_mismatch) + ", average %Var " +
              fmt("%.2f", scores.mean_pct_var())};
}

Outcome tobit() {
  // uncensored: OLS
  const auto z = uniform_covariates(80, 31, 0);
  Eigen::VectorXd beta(3);
  beta << 0.5, 0.1, -0.1;
  CounterRng rng(32);
  std::vector<double> y(80);
  for (Eigen::Index i = 0; i < 80; ++i) y[static_cast<std::size_t>(i)] = z.matrix().row(i).dot(beta) + rng.normal(0, 0.05);
  const auto fit = tobit_fit(y, z);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 80);
  const Eigen::VectorXd ols_beta = z.matrix().colPivHouseholderQr().solve(yv);
  const double ols_diff = (fit.beta - ols_beta).cwiseAbs().maxCoeff();

  // 20% censored recovery
  Eigen::VectorXd b(3);
  b << 0.78, 0.2, -0.1;
  const double sigma = 0.2;
  Eigen::VectorXd truth(4);
  truth << b, sigma;
  std::vector<Eigen::VectorXd> est;
  std::size_t censored = 0, total = 0;
  for (int r = 0; r < 100; ++r) {
    const auto zr = uniform_covariates(200, 7070, static_cast<std::uint64_t>(r));
    const auto scores = gen_censored_scores(zr.matrix(), b, sigma, 8080 + static_cast<std::uint64_t>(r));
    const auto f = tobit_fit(scores, zr);
    censored += f.n_lower + f.n_upper;
    total += scores.size();
    Eigen::VectorXd e(4);
    e << f.beta, f.sigma;
    est.push_back(e);
  }
  const double share = static_cast<double>(censored) / static_cast<double>(total);
  const double worst = worst_mc_z(est, truth);
  return {ols_diff <= 1e-6 && worst <= 3.0 && share > 0.15 && share < 0.25,
          "uncensored max |beta - OLS| " + fmt("%.1e", ols_diff) + "; censored share " + fmt("%.3f", share) +
              ", worst |bias|/MC SE " + fmt("%.2f", worst) + " over 100 reps"};
}

Outcome simar_wilson_criterion() {
  // L2 = 0 equals the plain truncated regression
  const auto z0 = uniform_covariates(60, 9191, 0);
  Eigen::VectorXd delta(3);
  delta << 0.8, -0.3, 0.2;
  const auto y0 = gen_truncated_scores(z0.matrix(), delta, 0.15, 9292);
  SimarWilsonOptions none;
  none.l2 = 0;
  const auto sw0 = truncreg_bootstrap(y0, z0, none);
  const auto tr = truncreg_fit(y0, z0);
  const bool reduces = sw0.delta == tr.delta && sw0.sigma == tr.sigma;

  // fixed seed: identical output
  SimarWilsonOptions fixed;
  fixed.l2 = 500;
  fixed.seed = 31337;
  const auto a = truncreg_bootstrap(y0, z0, fixed);
  const auto b = truncreg_bootstrap(y0, z0, fixed);
  bool identical = a.delta == b.delta && a.bootstrap_se == b.bootstrap_se;
  for (std::size_t j = 0; j < a.ci.size(); ++j) {
    identical = identical && a.ci[j].lower == b.ci[j].lower && a.ci[j].upper == b.ci[j].upper;
  }

  // coverage over 200 desk-scale replications
  const auto t0 = Clock::now();
  const int reps = 200;
  int cover[3] = {0, 0, 0};
  for (int r = 0; r < reps; ++r) {
    const auto z = uniform_covariates(40, 5151, static_cast<std::uint64_t>(r));
    const auto y = gen_truncated_scores(z.matrix(), delta, 0.15, 6161 + static_cast<std::uint64_t>(r));
    SimarWilsonOptions o;
    o.l2 = 1000;
    o.seed = 20111014 + static_cast<std::uint64_t>(r);
    const auto f = truncreg_bootstrap(y, z, o);
    for (int j = 0; j < 3; ++j) cover[j] += f.ci[static_cast<std::size_t>(j)].lower <= delta[j] &&
                                            delta[j] <= f.ci[static_cast<std::size_t>(j)].upper;
  }
  const double secs = seconds_since(t0);
  bool in_band = true;
  std::string cov;
  for (int j = 0; j < 3; ++j) {
    const double pct = 100.0 * cover[j] / reps;
    in_band = in_band && pct >= 91.0 && pct <= 99.0;
    cov += (j ? " / " : "") + fmt("%.1f", pct);
  }
  return {reduces && identical && in_band && secs < 120.0,
          std::string("L2=0 equals truncreg: ") + (reduces ? "yes" : "no") + "; fixed seed identical: " +
              (identical ? "yes" : "no") + "; 95% coverage " + cov + " % (N=40, p=3, L2=1000, 200 reps), " +
              fmt("%.1f", secs) + " s"};
}

Outcome translog_design() {
  const std::vector<std::string> table4 = {
      "Constant",     "SIZE'",       "NAR'",       "EMP",          "RUNW",         "TERM",         "SIZE'2",
      "NAR'2",        "SIZE' x NAR'", "EMP2",      "RUNW2",        "TERM2",        "EMP x RUNW",   "EMP x TERM",
      "RUNW x TERM",  "EMP x SIZE'", "EMP x NAR'", "RUNW x SIZE'", "RUNW x NAR'", "TERM x SIZE'", "TERM x NAR'"};
  const auto sample = gen_aena_sample();
  const auto base = build_design(sample.panel, sample.frontier);
  const bool names_match = base.names == table4 && base.regressors.cols() == 21;
  double worst = 0.0;
  for (double c : {0.01, 0.5, 3.0, 1e4}) {
    PanelDataset scaled = sample.panel;
    for (const auto& name : sample.frontier.outputs) {
      std::vector<double> v(sample.panel.column(name).begin(), sample.panel.column(name).end());
      for (auto& e : v) e *= c;
      scaled = scaled.with_variable(sample.panel.variable(name), v);
    }
    const auto d = build_design(scaled, sample.frontier);
    worst = std::max(worst, (d.response - (base.response.array() - std::log(c)).matrix()).cwiseAbs().maxCoeff());
    worst = std::max(worst, (d.regressors - base.regressors).cwiseAbs().maxCoeff());
  }
  return {names_match && worst <= 1e-12, std::to_string(base.regressors.cols()) + " coefficients, names " +
                                             (names_match ? "match" : "differ") + "; homogeneity max |diff| " +
                                             fmt("%.1e", worst)};
}

Outcome pipeline_bands(const std::filesystem::path& config) {
  const auto t0 = Clock::now();
  const auto r = run_pipeline(load_config(config));
  const double mean_te = r.sfa_scores->overall_mean();
  const double corr = *r.score_correlation;
  return {mean_te >= 0.70 && mean_te <= 0.90 && corr >= 0.5 && corr <= 0.85,
          "38 x 4 sample: mean SFA TE " + fmt("%.3f", mean_te) + ", SFA-DEA correlation " + fmt("%.3f", corr) +
              ", mean DEA " + fmt("%.3f", r.dea_scores->overall_mean()) + ", " + fmt("%.1f", seconds_since(t0)) +
              " s"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path config =
      argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path(EFFBENCH_DATA_DIR) / "aena_config.json";
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"DEA oracle equivalence", dea_oracle},
      {"DEA hand case", dea_hand_case},
      {"DEA properties", dea_properties},
      {"SFA recovery", sfa_recovery},
      {"Gradient check", gradient_check},
      {"BC92 structure", bc92_structure},
      {"Tobit", tobit},
      {"Simar-Wilson", simar_wilson_criterion},
      {"Translog design", translog_design},
      {"Pipeline band check", [&config] { return pipeline_bands(config); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d passed, %d failed\n", criteria.size(), static_cast<int>(criteria.size()) - failed,
              failed);
  return failed == 0 ? 0 : 1;
}

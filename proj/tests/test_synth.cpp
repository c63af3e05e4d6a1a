#include <cmath>

#include "doctest.h"
#include "effbench/dea.hpp"
#include "effbench/error.hpp"
#include "effbench/normal.hpp"
#include "effbench/csv.hpp"
#include "effbench/panel.hpp"
#include "effbench/synth.hpp"

using namespace effbench;

TEST_CASE("sfa generator: truth, bounds and determinism") {
  SynthSpec s;
  s.n_dmus = 20;
  s.n_periods = 4;
  s.eta = 0.1;
  s.seed = 9;
  const auto a = gen_sfa_panel(s);
  const auto b = gen_sfa_panel(s);
  CHECK(a.panel.n_obs() == 80);
  for (const auto& name : a.frontier.outputs) {
    const auto ca = a.panel.column(name);
    const auto cb = b.panel.column(name);
    CHECK(std::equal(ca.begin(), ca.end(), cb.begin()));
  }
  CHECK(a.true_te == b.true_te);
  for (double te : a.true_te) {
    CHECK(te > 0.0);
    CHECK(te <= 1.0);
  }
  // eta > 0: inefficiency shrinks over time.
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t t = 1; t < 4; ++t) CHECK(a.true_te[i * 4 + t] >= a.true_te[i * 4 + t - 1]);
  }
  CHECK(a.truth.gamma == doctest::Approx(0.09 / 0.1));
  CHECK(a.truth.sigma_sq == doctest::Approx(0.1));

  // The translog identity holds exactly at the truth.
  const auto d = build_design(a.panel, a.frontier);
  const Eigen::VectorXd composed = d.response - d.regressors * a.truth.beta;
  double var_v = 0.0;
  for (Eigen::Index r = 0; r < composed.size(); ++r) {
    const double v = composed[r] + std::log(a.true_te[static_cast<std::size_t>(r)]);
    var_v += v * v;
  }
  CHECK(std::sqrt(var_v / composed.size()) == doctest::Approx(s.sigma_v).epsilon(0.25));

  s.eta = 0.0;
  const auto flat = gen_sfa_panel(s);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t t = 1; t < 4; ++t) CHECK(flat.true_te[i * 4 + t] == flat.true_te[i * 4]);
  }

  s.sigma_u = 1e-9;
  for (double te : gen_sfa_panel(s).true_te) CHECK(te == doctest::Approx(1.0).epsilon(1e-7));

  s.n_outputs = 1;
  CHECK_THROWS_AS(gen_sfa_panel(s), Error);
}

TEST_CASE("dea generator: DEA recovers the stored theta") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    DeaSynthSpec s;
    s.n_dmus = 15;
    s.n_periods = 2;
    s.n_outputs = 1 + seed % 3;
    s.n_inputs = 1 + (seed + 1) % 3;
    s.n_frontier = 4;
    s.seed = seed;
    const auto g = gen_dea_panel(s);
    const auto table = dea_all(g.panel, g.frontier);
    const auto scores = table.scores();
    for (std::size_t k = 0; k < scores.size(); ++k) {
      CHECK(scores[k] == doctest::Approx(g.true_theta[k]).epsilon(1e-6));
    }
  }
}

TEST_CASE("dea generator: fixed contraction and two-DMU case") {
  DeaSynthSpec s;
  s.n_dmus = 10;
  s.n_frontier = 3;
  s.theta_lo = s.theta_hi = 0.75;
  const auto g = gen_dea_panel(s);
  const auto scores = dea_all(g.panel, g.frontier).scores();
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(scores[i] == doctest::Approx(i < 3 ? 1.0 : 0.75).epsilon(1e-6));
  }

  DeaSynthSpec two;
  two.n_dmus = 2;
  const auto g2 = gen_dea_panel(two);
  for (double v : dea_all(g2.panel, g2.frontier).scores()) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("truncated scores: bound, tiny-sigma limit, analytic mean") {
  const Eigen::Index n = 100000;
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(n, 1);
  Eigen::VectorXd delta(1);
  delta << 0.8;
  const double sigma = 0.3;
  const auto draws = gen_truncated_scores(z, delta, sigma, 77);
  double mean = 0.0;
  for (double v : draws) {
    CHECK(v <= 1.0);
    mean += v;
  }
  mean /= static_cast<double>(n);
  const double target = normal::upper_truncated_mean(0.8, sigma, 1.0);
  const double se = std::sqrt(normal::upper_truncated_variance(0.8, sigma, 1.0) / static_cast<double>(n));
  CHECK(std::fabs(mean - target) <= 3.0 * se);
  double var = 0.0;
  for (double v : draws) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  CHECK(var == doctest::Approx(normal::upper_truncated_variance(0.8, sigma, 1.0)).epsilon(0.02));

  CHECK(gen_truncated_scores(z.topRows(50), delta, sigma, 77) ==
        std::vector<double>(draws.begin(), draws.begin() + 50));

  Eigen::VectorXd half(1);
  half << 0.5;
  for (double v : gen_truncated_scores(z.topRows(100), half, 1e-9, 3)) CHECK(v == doctest::Approx(0.5));

  Eigen::VectorXd far(1);
  far << 6.0;
  try {
    gen_truncated_scores(z.topRows(10), far, 0.5, 1);
    FAIL("expected RejectionStall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RejectionStall);
  }
}

TEST_CASE("censored scores respect both limits") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(500, 1);
  Eigen::VectorXd b(1);
  b << 0.9;
  int at_one = 0;
  for (double v : gen_censored_scores(z, b, 0.2, 5)) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    at_one += v == 1.0;
  }
  CHECK(at_one > 50);
}

TEST_CASE("aena-like sample: shape, reference means, categories") {
  const auto a = gen_aena_sample();
  const auto& p = a.panel;
  CHECK(p.n_dmus() == 38);
  CHECK(p.periods() == std::vector<int>{2011, 2012, 2013, 2014});
  const std::pair<const char*, double> means[] = {{"ATM", 47669.78}, {"SIZE", 73.66409}, {"NAR", 17.92023},
                                                  {"EMP", 9.548649}, {"RUNW", 3534.414}, {"TERM", 90938.5}};
  for (const auto& [name, target] : means) {
    CHECK(describe(p, {name}).variables[0].mean == doctest::Approx(target).epsilon(1e-12));
  }
  auto count_airports = [&](const char* name) {
    int c = 0;
    for (std::size_t i = 0; i < p.n_dmus(); ++i) c += p.value(name, i, 0) > 0.5;
    return c;
  };
  CHECK(count_airports("ISLE") == 11);
  CHECK(count_airports("HUB") == 2);
  CHECK(count_airports("TOUR") == 14);
  for (double hh : p.column("HH")) CHECK((hh >= 0.0 && hh <= 10000.0));
  for (std::size_t r = 0; r < p.n_obs(); ++r) {
    CHECK(p.column("SIZE")[r] == doctest::Approx(p.column("PAX")[r] / p.column("ATM")[r]).epsilon(1e-12));
  }
  CHECK(a.price_index.at(2011) == 1.0);

  const auto b = gen_aena_sample();
  CHECK(to_csv(panel_to_table(a.panel)) == to_csv(panel_to_table(b.panel)));
  // eta < 0: true efficiency declines every year.
  for (std::size_t i = 0; i < 38; ++i) {
    for (std::size_t t = 1; t < 4; ++t) CHECK(a.true_te[i * 4 + t] < a.true_te[i * 4 + t - 1]);
  }
}

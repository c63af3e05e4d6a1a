#include <cmath>
#include <limits>

#include "doctest.h"
#include "effbench/lp.hpp"
#include "effbench/rng.hpp"

using namespace effbench;

namespace {

LinearProgram make_lp(ObjectiveSense sense, std::vector<double> c, std::vector<std::vector<double>> a,
                      std::vector<RowSense> rows, std::vector<double> b) {
  LinearProgram lp;
  lp.sense = sense;
  lp.objective = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  lp.constraints.resize(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) lp.constraints(i, j) = a[i][j];
  }
  lp.row_sense = std::move(rows);
  lp.rhs = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  lp.free_variable.assign(c.size(), false);
  return lp;
}

// Best feasible vertex of a 2-variable LP (x >= 0) by enumerating every
// pairwise intersection of constraint lines and the axes.
double vertex_oracle(const LinearProgram& lp) {
  std::vector<std::array<double, 3>> lines;  // a1 x + a2 y = b
  for (Eigen::Index i = 0; i < lp.n_rows(); ++i) {
    lines.push_back({lp.constraints(i, 0), lp.constraints(i, 1), lp.rhs[i]});
  }
  lines.push_back({1, 0, 0});
  lines.push_back({0, 1, 0});
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < lines.size(); ++p) {
    for (std::size_t q = p + 1; q < lines.size(); ++q) {
      const double det = lines[p][0] * lines[q][1] - lines[p][1] * lines[q][0];
      if (std::fabs(det) < 1e-12) continue;
      Eigen::Vector2d x((lines[p][2] * lines[q][1] - lines[p][1] * lines[q][2]) / det,
                        (lines[p][0] * lines[q][2] - lines[p][2] * lines[q][0]) / det);
      if (max_violation(lp, x) > 1e-9) continue;
      best = std::max(best, lp.objective.dot(x));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("max x subject to x <= 5") {
  auto lp = make_lp(ObjectiveSense::Maximize, {1}, {{1}}, {RowSense::LessEqual}, {5});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(5.0));
}

TEST_CASE("Beale's cycling example terminates under Bland's rule") {
  auto lp = make_lp(ObjectiveSense::Minimize, {-0.75, 20, -0.5, 6},
                    {{0.25, -8, -1, 9}, {0.5, -12, -0.5, 3}, {0, 0, 1, 0}},
                    {RowSense::LessEqual, RowSense::LessEqual, RowSense::LessEqual}, {0, 0, 1});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.25));
}

TEST_CASE("redundant equality rows are handled") {
  // x + y = 2 stated twice, plus 2x + 2y = 4.
  auto lp = make_lp(ObjectiveSense::Maximize, {1, 2}, {{1, 1}, {1, 1}, {2, 2}},
                    {RowSense::Equal, RowSense::Equal, RowSense::Equal}, {2, 2, 4});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(4.0));
  CHECK(max_violation(lp, sol.x) <= 1e-9);
}

TEST_CASE("infeasible, unbounded and iteration limit statuses") {
  auto infeasible = make_lp(ObjectiveSense::Maximize, {1}, {{1}, {1}},
                            {RowSense::GreaterEqual, RowSense::LessEqual}, {2, 1});
  CHECK(solve_lp(infeasible).status == LpStatus::Infeasible);

  auto unbounded = make_lp(ObjectiveSense::Maximize, {1}, {{1}}, {RowSense::GreaterEqual}, {1});
  CHECK(solve_lp(unbounded).status == LpStatus::Unbounded);

  auto lp = make_lp(ObjectiveSense::Maximize, {1, 1}, {{1, 2}, {3, 1}},
                    {RowSense::LessEqual, RowSense::LessEqual}, {4, 6});
  CHECK(solve_lp(lp, {.max_pivots = 0}).status == LpStatus::IterationLimit);
  CHECK(solve_lp(lp).status == LpStatus::Optimal);
}

TEST_CASE("free variables can go negative") {
  // min z subject to z >= -3, z free
  auto lp = make_lp(ObjectiveSense::Minimize, {1}, {{1}}, {RowSense::GreaterEqual}, {-3});
  lp.free_variable[0] = true;
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(-3.0));
}

TEST_CASE("random two-variable LPs agree with vertex enumeration") {
  CounterRng rng(2024);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = 2 + static_cast<int>(rng() % 4);
    std::vector<std::vector<double>> a;
    std::vector<RowSense> sense;
    std::vector<double> b;
    for (int i = 0; i < rows; ++i) {
      a.push_back({rng.uniform(-1, 3), rng.uniform(-1, 3)});
      const auto pick = rng() % 5;
      sense.push_back(pick == 0 ? RowSense::GreaterEqual : RowSense::LessEqual);
      b.push_back(pick == 0 ? rng.uniform(0, 2) : rng.uniform(1, 10));
    }
    // Box keeps every instance bounded.
    a.push_back({1, 0});
    a.push_back({0, 1});
    sense.push_back(RowSense::LessEqual);
    sense.push_back(RowSense::LessEqual);
    b.push_back(20);
    b.push_back(20);
    auto lp = make_lp(ObjectiveSense::Maximize, {rng.uniform(-2, 2), rng.uniform(-2, 2)}, a, sense, b);
    auto sol = solve_lp(lp);
    const double oracle = vertex_oracle(lp);
    if (std::isinf(oracle)) {
      CHECK(sol.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(sol.status == LpStatus::Optimal);
    ++optimal;
    CHECK(max_violation(lp, sol.x) <= 1e-9);
    CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-9));
  }
  CHECK(optimal > 100);
}

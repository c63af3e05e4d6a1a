#pragma once

// Brute-force reference computations shared by the unit and acceptance
// suites. None of them touch the library's solvers or estimators.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Output-oriented VRS expansion factor for a single-input single-output
/// reference set by exhaustive search over the lambda simplex.
///
/// With one output, one input and the convexity row, a basic optimal
/// solution has at most two positive lambdas, so the optimum lies on an edge
/// of the simplex. Edges are gridded at `edge_step`; vertices are exact and
/// two-dimensional faces are gridded at `face_step` as a cross-check.
inline double dea_vrs_phi_grid(const std::vector<double>& x, const std::vector<double>& y, std::size_t target,
                               double edge_step = 1e-4, double face_step = 1e-2) {
  const std::size_t n = x.size();
  const double x0 = x[target];
  const double y0 = y[target];
  double best = 0.0;
  auto consider = [&](double xs, double ys) {
    if (xs <= x0 * (1.0 + 1e-12)) best = std::max(best, ys / y0);
  };
  for (std::size_t a = 0; a < n; ++a) consider(x[a], y[a]);
  const int edge_points = static_cast<int>(std::lround(1.0 / edge_step));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (int s = 0; s <= edge_points; ++s) {
        const double t = static_cast<double>(s) / edge_points;
        consider(t * x[a] + (1 - t) * x[b], t * y[a] + (1 - t) * y[b]);
      }
    }
  }
  const int face_points = static_cast<int>(std::lround(1.0 / face_step));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        for (int s = 0; s <= face_points; ++s) {
          for (int u = 0; s + u <= face_points; ++u) {
            const double la = static_cast<double>(s) / face_points;
            const double lb = static_cast<double>(u) / face_points;
            const double lc = 1.0 - la - lb;
            consider(la * x[a] + lb * x[b] + lc * x[c], la * y[a] + lb * y[b] + lc * y[c]);
          }
        }
      }
    }
  }
  return best;
}

/// Maximizes f over a box by repeated grid zooming (brute force, no derivatives).
inline std::vector<double> grid_zoom_maximize(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> center, std::vector<double> half_width,
                                              int points_per_axis = 11, double final_width = 1e-6) {
  const std::size_t d = center.size();
  while (*std::max_element(half_width.begin(), half_width.end()) > final_width) {
    std::vector<double> best_point = center;
    double best = f(center);
    std::vector<int> idx(d, 0);
    while (true) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k) {
        p[k] = center[k] - half_width[k] + 2.0 * half_width[k] * idx[k] / (points_per_axis - 1);
      }
      const double v = f(p);
      if (v > best) {
        best = v;
        best_point = p;
      }
      std::size_t k = 0;
      while (k < d && ++idx[k] == points_per_axis) idx[k++] = 0;
      if (k == d) break;
    }
    center = best_point;
    for (auto& w : half_width) w *= 0.5;
  }
  return center;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace oracle

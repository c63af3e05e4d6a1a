#include "effbench/optimize.hpp"

#include <cmath>
#include <limits>

namespace effbench {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

BfgsResult maximize_bfgs(const Objective& f, Eigen::VectorXd start, const BfgsOptions& options) {
  const Eigen::Index n = start.size();
  BfgsResult result;
  result.x = std::move(start);
  result.gradient.resize(n);
  result.value = f(result.x, &result.gradient);
  result.trace.push_back(result.value);
  if (!std::isfinite(result.value) || !all_finite(result.gradient)) {
    result.gradient_norm = std::numeric_limits<double>::infinity();
    return result;
  }

  // Inverse Hessian of the negated objective; ascent direction is H * g.
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  bool fresh_hessian = true;
  Eigen::VectorXd x_new(n), g_new(n);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.gradient_norm = result.gradient.norm();
    if (result.gradient_norm < options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd direction = inv_hessian * result.gradient;
    double slope = result.gradient.dot(direction);
    if (!(slope > 0.0)) {
      inv_hessian.setIdentity();
      fresh_hessian = true;
      direction = result.gradient;
      slope = result.gradient.squaredNorm();
    }
    const double dir_norm = direction.norm();
    double alpha = dir_norm > options.max_step ? options.max_step / dir_norm : 1.0;
    if (fresh_hessian) alpha = std::min(alpha, 1.0 / std::max(1.0, dir_norm));

    bool accepted = false;
    double f_new = 0.0;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      x_new = result.x + alpha * direction;
      f_new = f(x_new, &g_new);
      if (std::isfinite(f_new) && all_finite(g_new)) {
        if (f_new >= result.value + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        // Near the optimum the Armijo gain drowns in rounding; accept a
        // non-decreasing step that still shrinks the gradient.
        if (f_new >= result.value && g_new.norm() < result.gradient.norm()) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (fresh_hessian) break;
      inv_hessian.setIdentity();
      fresh_hessian = true;
      continue;
    }

    const Eigen::VectorXd s = x_new - result.x;
    // y is the change in the gradient of the negated objective.
    const Eigen::VectorXd y = result.gradient - g_new;
    const double sy = s.dot(y);
    const double f_old = result.value;

    result.x = x_new;
    result.gradient = g_new;
    result.value = f_new;
    result.iterations = iter + 1;
    result.trace.push_back(f_new);

    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_hessian) {
        inv_hessian *= sy / y.squaredNorm();
        fresh_hessian = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      inv_hessian += rho * ((1.0 + rho * y.dot(hy)) * (s * s.transpose()) -
                            (hy * s.transpose() + s * hy.transpose()));
    }

    const double rel_change = std::fabs(f_new - f_old) / std::max(1.0, std::fabs(f_new));
    result.gradient_norm = result.gradient.norm();
    if (result.gradient_norm < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (rel_change < options.relative_tolerance * 1e-3 && s.norm() < 1e-14) break;
  }
  result.gradient_norm = result.gradient.norm();
  result.converged = result.gradient_norm < options.gradient_tolerance;
  return result;
}

// Newton refinement from a BFGS end point; keeps ascent monotone.
void newton_refine(const Objective& f, BfgsResult& r, double tol, int max_steps) {
  for (int step = 0; step < max_steps && r.gradient_norm >= tol; ++step) {
    const Eigen::MatrixXd h = numeric_hessian(f, r.x);
    Eigen::LLT<Eigen::MatrixXd> llt(-h);
    Eigen::VectorXd dir = llt.info() == Eigen::Success ? Eigen::VectorXd(llt.solve(r.gradient)) : r.gradient;
    if (!dir.allFinite()) return;
    // Close to the optimum the predicted gain sits below the rounding noise of
    // the summed likelihood; such steps are judged by the gradient alone.
    const double noise = 1e-11 * std::max(1.0, std::fabs(r.value));
    const bool rounding_level = r.gradient.dot(dir) <= noise;
    bool moved = false;
    for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
      const Eigen::VectorXd x = r.x + alpha * dir;
      Eigen::VectorXd g;
      const double v = f(x, &g);
      const double floor = rounding_level ? r.value - noise : r.value;
      if (std::isfinite(v) && g.allFinite() && (v > r.value || (v >= floor && g.norm() < r.gradient_norm))) {
        r.x = x;
        r.value = v;
        r.gradient = g;
        r.gradient_norm = g.norm();
        r.trace.push_back(v);
        ++r.iterations;
        moved = true;
        break;
      }
    }
    if (!moved) return;
  }
  r.converged = r.gradient_norm < tol;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hessian(n, n);
  Eigen::VectorXd xp = x, xm = x, gp(n), gm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = step * std::max(1.0, std::fabs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    f(xp, &gp);
    f(xm, &gm);
    hessian.col(i) = (gp - gm) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return 0.5 * (hessian + hessian.transpose());
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd grad(n);
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    grad[i] = (f(xp, nullptr) - f(xm, nullptr)) / (2.0 * step);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return grad;
}

}  // namespace effbench

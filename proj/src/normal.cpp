#include "effbench/normal.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

namespace effbench::normal {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double pdf(double z) { return std::exp(log_pdf(z)); }

double cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double log_cdf(double z) {
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
  if (z > -30.0) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
  // Phi(z) = phi(z)/(-z) * (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - ...)
  const double w = 1.0 / (z * z);
  const double series = 1.0 - w * (1.0 - w * (3.0 - w * (15.0 - w * 105.0)));
  return log_pdf(z) - std::log(-z) + std::log(series);
}

double mills(double z) { return std::exp(log_pdf(z) - log_cdf(z)); }

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double upper_truncated_mean(double mu, double sigma, double upper) {
  const double b = (upper - mu) / sigma;
  return mu - sigma * mills(b);
}

double upper_truncated_variance(double mu, double sigma, double upper) {
  const double b = (upper - mu) / sigma;
  const double m = mills(b);
  return sigma * sigma * (1.0 - b * m - m * m);
}

double two_sided_p(double z) {
  return std::erfc(std::fabs(z) * kInvSqrt2);
}

}  // namespace effbench::normal

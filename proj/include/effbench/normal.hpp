#pragma once

// Standard normal helpers evaluated in log space where tails matter.

namespace effbench::normal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_pdf(double z);
double pdf(double z);
double cdf(double z);

/// log Phi(z), accurate far into the lower tail (asymptotic series below -30).
double log_cdf(double z);

/// phi(z) / Phi(z), the inverse Mills ratio of the lower tail.
double mills(double z);

/// Phi^{-1}(p) for p in (0, 1).
double quantile(double p);

/// Mean of N(mu, sigma^2) restricted to (-inf, upper].
double upper_truncated_mean(double mu, double sigma, double upper);

/// Variance of N(mu, sigma^2) restricted to (-inf, upper].
double upper_truncated_variance(double mu, double sigma, double upper);

/// Two-sided normal p-value for a z statistic.
double two_sided_p(double z);

}  // namespace effbench::normal

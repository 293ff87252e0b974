#pragma once

#include <span>

namespace nhmc::stats {

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a,b) via the Lentz continued fraction.
double reg_inc_beta(double x, double a, double b);

// Inverse of I_x(a,b) in x, i.e. the Beta(a,b) quantile function.
double inc_beta_inv(double p, double a, double b);

double normal_cdf(double z);
double normal_quantile(double u);

// One-sided Clopper-Pearson bounds at confidence `conf` (e.g. 0.99) for a
// Binomial(n, p) observation of k successes.
double clopper_pearson_lower(long k, long n, double conf);
double clopper_pearson_upper(long k, long n, double conf);

// Order-stable pairwise summation.
double pairwise_sum(std::span<const double> v);

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

// Least-squares slope of y against x.
double regression_slope(std::span<const double> x, std::span<const double> y);

double median(std::span<const double> v);          // does not modify input
double quantile(std::span<const double> v, double q);

}  // namespace nhmc::stats

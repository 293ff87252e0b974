#pragma once

#include <cstdint>
#include <vector>

#include "nhmc/chains.hpp"

namespace nhmc {

enum class AveragePolicy { FinalIterate, UniformAverage, SuffixAverage };

struct SAResult {
    Vec x_final, x_avg, x_suffix;
    double err_final = 0.0, err_avg = 0.0, err_suffix = 0.0;
};

// Solution of A x = B for the linear solver family.
Vec solve_x_star(const ChainModel& m);

// One solver run; returns the final iterate, uniform average and suffix
// average (2/n) sum_{i=[n/2]}^n X_i, with ||.-x*||_p errors.
SAResult run_sa(const ChainModel& m, const Vec& x_star, long n, std::uint64_t seed);

// ||E X_n - x*||_p <= ||E X_1 - x*||_p exp{-(gamma lambda/(1-alpha)^2)(n-2)/n^alpha}.
double mean_bias_bound(const ChainModel& m, long n, double ex1_err);

// C_0 = ||E X_1 - x*||_p (1 + sum_k exp{-(gamma lambda/(1-alpha)^2)(k-2)/k^alpha});
// the series is truncated once terms drop below 1e-16.
double bias_constant_C0(const ChainModel& m, double ex1_err);

// ||E Xbar_n - x*||_p from the exact mean recursion.
double exact_mean_average_error(const ChainModel& m, long n, const Vec& x_star);
double exact_mean_final_error(const ChainModel& m, long n, const Vec& x_star);
// Suffix-window analogue; dominated by (2 C_0 + 3 ||x*||_p)/n because the
// (2/n) normalization over n - [n/2] + 1 terms leaves an O(1/n) remainder.
double exact_mean_suffix_error(const ChainModel& m, long n, const Vec& x_star);

struct SlopePoint {
    long n;
    double mean_err;
};
struct SlopeResult {
    double slope = 0.0;
    std::vector<SlopePoint> points;
};

// Monte-Carlo E||estimator - x*||_2 across a horizon grid and the log-log
// regression slope.
SlopeResult slope_experiment(const ChainModel& m, const Vec& x_star,
                             const std::vector<long>& n_grid, long N, std::uint64_t seed,
                             AveragePolicy policy, int threads = 0);

// All three estimators from one simulation pass, indexed by AveragePolicy.
struct SlopeSuite {
    SlopeResult final_iterate, uniform, suffix;
};
SlopeSuite slope_experiment_all(const ChainModel& m, const Vec& x_star,
                                const std::vector<long>& n_grid, long N, std::uint64_t seed,
                                int threads = 0);

}  // namespace nhmc

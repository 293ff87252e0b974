#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nhmc/chains.hpp"

namespace nhmc {

// Scalar one-step prediction family f_k(theta, x) = (1 - theta/k^alpha) x with
// absolute loss, fitted by grid search over theta.
struct ERMProblem {
    double theta_lo = 0.1, theta_hi = 0.9;
    double theta0 = 0.5;
    double alpha = 0.25;       // in (0, 1/2)
    NoiseSpec noise;           // scalar innovation law
    double x1 = 1.0;           // deterministic start
    double L = 1.0;            // loss Lipschitz constant (|.| has L = 1)
    std::optional<double> eps_grid;  // spacing override, must be <= 1/(L n)
};

ERMProblem make_erm_problem(double theta_lo, double theta_hi, double theta0, double alpha,
                            NoiseSpec noise, double x1,
                            std::optional<double> eps_grid = std::nullopt);

// The data-generating chain at theta0.
ChainModel erm_chain(const ERMProblem& prob);

// Grid over [theta_lo, theta_hi] with spacing <= 1/(L n).
std::vector<double> erm_grid(const ERMProblem& prob, long n);

double empirical_risk(const ERMProblem& prob, double theta, const std::vector<Vec>& traj);

struct PopRisk {
    double value = 0.0, se = 0.0;
};
PopRisk population_risk(const ERMProblem& prob, double theta, long n, long N, std::uint64_t seed,
                        int threads = 0);

// Grid argmin of the empirical risk; ties break toward smaller theta.
double erm_fit(const ERMProblem& prob, const std::vector<Vec>& traj);

// Entropy H(Theta, eps) = 1 v ln N(Theta, eps) of the scalar family, whose
// covering metric is 2^{-alpha} |theta - theta'|.
double covering_entropy(const ERMProblem& prob, double eps);

struct ExcessReport {
    std::vector<long> n_grid;
    long reps = 0;
    std::vector<std::vector<double>> excess;  // [n index][repetition]
    std::vector<double> excess_median, excess_q10, excess_q90;
    std::vector<double> fitted_envelope;  // median-Chat * sqrt(ln n / n^{1-2alpha})
    long domination_count = 0;  // repetitions whose fitted envelope dominates at larger n
    double pop_se_ratio = 0.0;  // SE of Rhat relative to the median excess at n_grid[0]
};

// Shared-trajectory excess-risk experiment: the population risk surface is
// estimated once per horizon from N_pop trajectories and reused across
// repetitions, so every excess is nonnegative by construction.
ExcessReport excess_risk_experiment(const ERMProblem& prob, const std::vector<long>& n_grid,
                                    long N_pop, long reps, std::uint64_t seed, int threads = 0);

}  // namespace nhmc

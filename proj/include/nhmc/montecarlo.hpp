#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nhmc/chains.hpp"
#include "nhmc/envelopes.hpp"

namespace nhmc {

// Separately Lipschitz functional of the trajectory.
struct FunctionalSpec {
    enum class Kind { SumOfStates, SumOfNorms, Custom };
    Kind kind = Kind::SumOfStates;
    int custom_dim = 1;
    double lipschitz = 1.0;  // per-argument certificate, must be <= 1
    std::function<Vec(const std::vector<Vec>&)> fn;

    static FunctionalSpec sum_of_states();
    static FunctionalSpec sum_of_norms();
    static FunctionalSpec custom(std::function<Vec(const std::vector<Vec>&)> fn, int out_dim,
                                 double lipschitz);

    int dim(const ChainModel& m) const;
    Vec eval(const ChainModel& m, const std::vector<Vec>& traj) const;
    std::string name() const;
};

struct TailEstimate {
    std::vector<double> x_grid;  // thresholds on the raw u scale
    std::vector<long> counts;
    long N = 0;
    std::vector<double> p_hat, p_lcb_99, p_ucb_99;
    bool exact = false;
    double center_bias = 0.0;  // centering-error bound folded into the bands

    std::string model_tag;
    long n = 0;
    int d = 1;
    double p = 2.0;
};

struct DominationReport {
    std::string envelope_tag;
    bool pass = false;
    struct Violation {
        double u, p_lcb, bound;
    };
    std::vector<bool> ok;
    std::vector<Violation> violations;
    std::vector<double> bounds;
    double min_margin = 0.0;
    double median_margin = 0.0;
};

// E f and a high-probability bound on the centering error (0 when the mean is
// exact). Non-affine functionals use a pilot run of 10 N replications on
// independent streams.
struct Centering {
    Vec value;
    double bias_bound = 0.0;
    bool exact = false;
};
Centering compute_centering(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                            std::uint64_t seed, std::uint64_t pilot_seed);

// ||f(traj) - center||_p for replications 0..N-1. The OpenMP kernel and the
// serial reference produce identical arrays.
std::vector<double> replicate_norms(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                                    std::uint64_t seed, const Vec& center, int threads);
std::vector<double> replicate_norms_serial(const ChainModel& m, const FunctionalSpec& f, long n,
                                           long N, std::uint64_t seed, const Vec& center);

// 40 log-spaced thresholds from the sample median to 1.5x the sample max.
std::vector<double> default_x_grid(const std::vector<double>& norms);

// Empirical tail with one-sided 99% Clopper-Pearson bands. Pass an empty
// x_grid to use the default policy. pilot_seed = 0 derives one from `seed`.
TailEstimate estimate_tail(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                           std::vector<double> x_grid, std::uint64_t seed, int threads = 0,
                           std::uint64_t pilot_seed = 0);
TailEstimate estimate_tail_serial(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                                  std::vector<double> x_grid, std::uint64_t seed,
                                  std::uint64_t pilot_seed = 0);

// Exact tail by enumerating every noise path of a finite-atom chain.
TailEstimate enumerate_exact_tail(const ChainModel& m, const FunctionalSpec& f, long n,
                                  std::vector<double> x_grid, int threads = 0);

struct MomentEstimate {
    double estimate = 0.0;
    double ucb_99 = 0.0;  // normal-approximation UCB inflated by 1.5 (heuristic)
    long N = 0;
};
MomentEstimate estimate_moment_norm(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                                    double q, std::uint64_t seed, int threads = 0);

// PASS iff no threshold has p_lcb_99 above the envelope.
DominationReport check_domination(const TailEstimate& tail, const BoundEnvelope& env);

}  // namespace nhmc

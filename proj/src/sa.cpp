#include "nhmc/sa.hpp"

#include <cmath>

#include "nhmc/parallel.hpp"
#include "nhmc/stats.hpp"

namespace nhmc {

namespace {

void check_linear_family(const ChainModel& m, const char* who) {
    check(m.example == Example::LinearSA || m.example == Example::LinearSAScaledNoise ||
              m.example == Example::LinearSAAdditive,
          std::string(who) + ": linear solver family required");
}

void check_centered_noise(const ChainModel& m, const char* who) {
    for (double v : m.noise.mean())
        check(std::fabs(v) < 1e-14, std::string(who) + ": centered noise required");
}

struct StreamingRun {
    Vec x_final, x_avg, x_suffix;
};

StreamingRun run_streaming(const ChainModel& m, long n, rng::Stream& stream) {
    long suffix_from = n / 2;
    Vec x = m.init.sample(stream);
    Vec sum = x;
    Vec suffix(static_cast<std::size_t>(m.d), 0.0);
    if (1 >= suffix_from)
        for (int i = 0; i < m.d; ++i) suffix[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
    for (long k = 2; k <= n; ++k) {
        x = step(m, k, x, stream);
        for (int i = 0; i < m.d; ++i) {
            sum[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
            if (k >= suffix_from) suffix[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
        }
    }
    StreamingRun r;
    r.x_final = x;
    r.x_avg = sum;
    r.x_suffix = suffix;
    for (int i = 0; i < m.d; ++i) {
        r.x_avg[static_cast<std::size_t>(i)] /= static_cast<double>(n);
        r.x_suffix[static_cast<std::size_t>(i)] *= 2.0 / static_cast<double>(n);
    }
    return r;
}

double err_p(const Vec& x, const Vec& x_star, double p) {
    Vec diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - x_star[i];
    return lp_norm(diff, p);
}

}  // namespace

Vec solve_x_star(const ChainModel& m) {
    check_linear_family(m, "solve_x_star");
    return solve_spd(m.A, m.B);
}

SAResult run_sa(const ChainModel& m, const Vec& x_star, long n, std::uint64_t seed) {
    check(n >= 2, "run_sa: n must be at least 2");
    rng::Stream stream(seed);
    auto r = run_streaming(m, n, stream);
    SAResult out;
    out.x_final = r.x_final;
    out.x_avg = r.x_avg;
    out.x_suffix = r.x_suffix;
    out.err_final = err_p(r.x_final, x_star, m.p);
    out.err_avg = err_p(r.x_avg, x_star, m.p);
    out.err_suffix = err_p(r.x_suffix, x_star, m.p);
    return out;
}

// prod_{k=2}^n rho_k <= exp{-gamma lambda sum_{k=2}^n k^-alpha}
//                    <= exp{-gamma lambda (n-2)/n^alpha}.
double mean_bias_bound(const ChainModel& m, long n, double ex1_err) {
    check(m.example == Example::LinearSA, "mean_bias_bound: deterministic-A solver required");
    check(n >= 2, "mean_bias_bound: n must be at least 2");
    double c = m.gamma * m.lambda_min;
    double expo = c * static_cast<double>(n - 2) / std::pow(static_cast<double>(n), m.alpha);
    return ex1_err * std::exp(-expo);
}

double bias_constant_C0(const ChainModel& m, double ex1_err) {
    check(m.example == Example::LinearSA, "bias_constant_C0: deterministic-A solver required");
    double c = m.gamma * m.lambda_min;
    double series = 0.0;
    bool converged = false;
    for (long k = 2; k < 50000000L; ++k) {
        double term = std::exp(-c * static_cast<double>(k - 2) / std::pow(static_cast<double>(k), m.alpha));
        series += term;
        if (term < 1e-16) {
            converged = true;
            break;
        }
    }
    check(converged, "bias_constant_C0: series converges too slowly for these parameters");
    return ex1_err * (1.0 + series);
}

double exact_mean_average_error(const ChainModel& m, long n, const Vec& x_star) {
    check_centered_noise(m, "exact_mean_average_error");
    auto means = exact_mean_trajectory(m, n);
    check(means.has_value(), "exact_mean_average_error: affine model required");
    Vec avg(static_cast<std::size_t>(m.d), 0.0);
    for (const Vec& x : *means)
        for (int i = 0; i < m.d; ++i) avg[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
    for (double& v : avg) v /= static_cast<double>(n);
    return err_p(avg, x_star, m.p);
}

double exact_mean_final_error(const ChainModel& m, long n, const Vec& x_star) {
    check_centered_noise(m, "exact_mean_final_error");
    auto means = exact_mean_trajectory(m, n);
    check(means.has_value(), "exact_mean_final_error: affine model required");
    return err_p(means->back(), x_star, m.p);
}

double exact_mean_suffix_error(const ChainModel& m, long n, const Vec& x_star) {
    check_centered_noise(m, "exact_mean_suffix_error");
    auto means = exact_mean_trajectory(m, n);
    check(means.has_value(), "exact_mean_suffix_error: affine model required");
    long from = n / 2;
    Vec acc(static_cast<std::size_t>(m.d), 0.0);
    for (long i = std::max(from, 1L); i <= n; ++i)
        for (int j = 0; j < m.d; ++j)
            acc[static_cast<std::size_t>(j)] += (*means)[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
    for (double& v : acc) v *= 2.0 / static_cast<double>(n);
    return err_p(acc, x_star, m.p);
}

SlopeSuite slope_experiment_all(const ChainModel& m, const Vec& x_star,
                                const std::vector<long>& n_grid, long N, std::uint64_t seed,
                                int threads) {
    check(n_grid.size() >= 2, "slope_experiment: need at least two horizons");
    check(N >= 100, "slope_experiment: need at least 100 replications");
    SlopeSuite out;
    std::vector<double> lx;
    std::vector<std::vector<double>> ly(3);
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        long n = n_grid[g];
        std::vector<double> err_fin(static_cast<std::size_t>(N));
        std::vector<double> err_uni(static_cast<std::size_t>(N));
        std::vector<double> err_suf(static_cast<std::size_t>(N));
        parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t r) {
            auto stream = rng::replication_stream(seed, r, 0x51EA000 + g);
            auto run = run_streaming(m, n, stream);
            err_fin[r] = err_p(run.x_final, x_star, 2.0);
            err_uni[r] = err_p(run.x_avg, x_star, 2.0);
            err_suf[r] = err_p(run.x_suffix, x_star, 2.0);
        });
        double mf = stats::mean(err_fin), mu = stats::mean(err_uni), ms = stats::mean(err_suf);
        out.final_iterate.points.push_back({n, mf});
        out.uniform.points.push_back({n, mu});
        out.suffix.points.push_back({n, ms});
        lx.push_back(std::log(static_cast<double>(n)));
        ly[0].push_back(std::log(mf));
        ly[1].push_back(std::log(mu));
        ly[2].push_back(std::log(ms));
    }
    out.final_iterate.slope = stats::regression_slope(lx, ly[0]);
    out.uniform.slope = stats::regression_slope(lx, ly[1]);
    out.suffix.slope = stats::regression_slope(lx, ly[2]);
    return out;
}

SlopeResult slope_experiment(const ChainModel& m, const Vec& x_star,
                             const std::vector<long>& n_grid, long N, std::uint64_t seed,
                             AveragePolicy policy, int threads) {
    SlopeSuite suite = slope_experiment_all(m, x_star, n_grid, N, seed, threads);
    switch (policy) {
        case AveragePolicy::FinalIterate: return suite.final_iterate;
        case AveragePolicy::UniformAverage: return suite.uniform;
        case AveragePolicy::SuffixAverage: return suite.suffix;
    }
    return suite.uniform;
}

}  // namespace nhmc

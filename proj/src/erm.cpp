#include "nhmc/erm.hpp"

#include <algorithm>
#include <cmath>

#include "nhmc/parallel.hpp"
#include "nhmc/stats.hpp"

namespace nhmc {

namespace {

// Residual of the one-step prediction: X_k - f_k(theta, X_{k-1}) = a_k + theta b_k.
struct ResidCoeffs {
    std::vector<double> a, b;  // index 0 holds k = 2
};

ResidCoeffs resid_coeffs(const ERMProblem& prob, const std::vector<Vec>& traj) {
    long n = static_cast<long>(traj.size());
    check(n >= 2, "empirical_risk: trajectory must have length >= 2");
    ResidCoeffs rc;
    rc.a.reserve(static_cast<std::size_t>(n - 1));
    rc.b.reserve(static_cast<std::size_t>(n - 1));
    for (long k = 2; k <= n; ++k) {
        double xk = traj[static_cast<std::size_t>(k - 1)][0];
        double xp = traj[static_cast<std::size_t>(k - 2)][0];
        rc.a.push_back(xk - xp);
        rc.b.push_back(xp / std::pow(static_cast<double>(k), prob.alpha));
    }
    return rc;
}

double risk_from_coeffs(const ResidCoeffs& rc, double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < rc.a.size(); ++i) s += std::fabs(rc.a[i] + theta * rc.b[i]);
    return s / static_cast<double>(rc.a.size());
}

// Argmin of a convex function over grid indices; ties break to the smallest
// index (discrete ternary narrowing, then a scan and a plateau walk).
template <class F>
std::size_t convex_grid_argmin(std::size_t size, F&& f) {
    std::size_t lo = 0, hi = size - 1;
    while (hi - lo > 8) {
        std::size_t m1 = lo + (hi - lo) / 3;
        std::size_t m2 = hi - (hi - lo) / 3;
        if (f(m1) < f(m2))
            hi = m2;
        else
            lo = m1;
    }
    std::size_t best = lo;
    double fbest = f(lo);
    for (std::size_t i = lo + 1; i <= hi; ++i) {
        double v = f(i);
        if (v < fbest) {
            fbest = v;
            best = i;
        }
    }
    while (best > 0 && f(best - 1) <= fbest) --best;
    return best;
}

double envelope_shape(long n, double alpha) {
    double nd = static_cast<double>(n);
    return std::sqrt(std::log(nd) / std::pow(nd, 1.0 - 2.0 * alpha));
}

}  // namespace

ERMProblem make_erm_problem(double theta_lo, double theta_hi, double theta0, double alpha,
                            NoiseSpec noise, double x1, std::optional<double> eps_grid) {
    check(theta_lo > 0.0 && theta_hi < 1.0 && theta_lo <= theta_hi,
          "make_erm_problem: parameter range must satisfy 0 < lo <= hi < 1");
    check(theta0 >= theta_lo && theta0 <= theta_hi, "make_erm_problem: theta0 must lie in the range");
    check(alpha > 0.0 && alpha < 0.5, "make_erm_problem: alpha must lie in (0, 1/2)");
    check(noise.d == 1, "make_erm_problem: scalar chain");
    ERMProblem p;
    p.theta_lo = theta_lo;
    p.theta_hi = theta_hi;
    p.theta0 = theta0;
    p.alpha = alpha;
    p.noise = noise;
    p.x1 = x1;
    p.eps_grid = eps_grid;
    return p;
}

ChainModel erm_chain(const ERMProblem& prob) {
    return make_unit_root(prob.theta0, prob.alpha, false, prob.noise, InitSpec::point({prob.x1}));
}

std::vector<double> erm_grid(const ERMProblem& prob, long n) {
    check(n >= 2, "erm_grid: n must be at least 2");
    double range = prob.theta_hi - prob.theta_lo;
    if (range == 0.0) return {prob.theta_lo};
    double cap = 1.0 / (prob.L * static_cast<double>(n));
    double eps = prob.eps_grid.value_or(cap);
    check(eps <= cap + 1e-15, "erm_grid: spacing must not exceed 1/(L n)");
    long cells = std::max<long>(1, static_cast<long>(std::ceil(range / eps)));
    std::vector<double> grid(static_cast<std::size_t>(cells) + 1);
    for (long i = 0; i <= cells; ++i)
        grid[static_cast<std::size_t>(i)] =
            prob.theta_lo + range * static_cast<double>(i) / static_cast<double>(cells);
    return grid;
}

double empirical_risk(const ERMProblem& prob, double theta, const std::vector<Vec>& traj) {
    return risk_from_coeffs(resid_coeffs(prob, traj), theta);
}

PopRisk population_risk(const ERMProblem& prob, double theta, long n, long N, std::uint64_t seed,
                        int threads) {
    check(N >= 2, "population_risk: need at least two trajectories");
    ChainModel chain = erm_chain(prob);
    std::vector<double> risks(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t r) {
        auto stream = rng::replication_stream(seed, r, 0xE27);
        risks[r] = empirical_risk(prob, theta, simulate(chain, n, stream));
    });
    PopRisk out;
    out.value = stats::mean(risks);
    out.se = stats::sample_sd(risks) / std::sqrt(static_cast<double>(N));
    return out;
}

double erm_fit(const ERMProblem& prob, const std::vector<Vec>& traj) {
    auto rc = resid_coeffs(prob, traj);
    auto grid = erm_grid(prob, static_cast<long>(traj.size()));
    std::size_t i = convex_grid_argmin(grid.size(),
                                       [&](std::size_t j) { return risk_from_coeffs(rc, grid[j]); });
    return grid[i];
}

double covering_entropy(const ERMProblem& prob, double eps) {
    check(eps > 0.0, "covering_entropy: eps must be positive");
    double metric_scale = std::pow(2.0, -prob.alpha);  // sup_{k>=2} k^{-alpha}
    double range = prob.theta_hi - prob.theta_lo;
    double count = std::max(1.0, std::ceil(range * metric_scale / (2.0 * eps)));
    return std::max(1.0, std::log(count));
}

ExcessReport excess_risk_experiment(const ERMProblem& prob, const std::vector<long>& n_grid,
                                    long N_pop, long reps, std::uint64_t seed, int threads) {
    check(n_grid.size() >= 2, "excess_risk_experiment: need at least two horizons");
    check(std::is_sorted(n_grid.begin(), n_grid.end()), "excess_risk_experiment: sort the horizons");
    check(N_pop >= 100 && reps >= 1, "excess_risk_experiment: N_pop >= 100 and reps >= 1 required");
    ChainModel chain = erm_chain(prob);
    ExcessReport rep;
    rep.n_grid = n_grid;
    rep.reps = reps;
    rep.excess.assign(n_grid.size(), std::vector<double>(static_cast<std::size_t>(reps), 0.0));

    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        long n = n_grid[g];
        auto grid = erm_grid(prob, n);
        // Population surface from shared trajectories: store residual
        // coefficients flat so Rhat(theta) is one pass. The surface-noise
        // rule binds at the smallest horizon, so the trajectory count scales
        // down with n to keep memory flat.
        long N_pop_g = std::max<long>(200, N_pop * n_grid.front() / n);
        std::size_t terms = static_cast<std::size_t>(n - 1);
        std::vector<double> A(static_cast<std::size_t>(N_pop_g) * terms);
        std::vector<double> Bc(static_cast<std::size_t>(N_pop_g) * terms);
        parallel_for(static_cast<std::size_t>(N_pop_g), threads, [&](std::size_t r) {
            auto stream = rng::replication_stream(seed, r, 0xE2900 + g);
            auto rc = resid_coeffs(prob, simulate(chain, n, stream));
            std::copy(rc.a.begin(), rc.a.end(), A.begin() + static_cast<std::ptrdiff_t>(r * terms));
            std::copy(rc.b.begin(), rc.b.end(), Bc.begin() + static_cast<std::ptrdiff_t>(r * terms));
        });
        auto rhat = [&](double theta) {
            double s = 0.0;
            for (std::size_t i = 0; i < A.size(); ++i) s += std::fabs(A[i] + theta * Bc[i]);
            return s / static_cast<double>(A.size());
        };
        std::size_t imin = convex_grid_argmin(grid.size(), [&](std::size_t j) { return rhat(grid[j]); });
        double rmin = rhat(grid[imin]);

        std::vector<double>& exc = rep.excess[g];
        std::vector<std::size_t> jhats(static_cast<std::size_t>(reps));
        parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
            auto stream = rng::replication_stream(seed, r, 0xF17000 + g);
            auto rc = resid_coeffs(prob, simulate(chain, n, stream));
            std::size_t jhat = convex_grid_argmin(
                grid.size(), [&](std::size_t j) { return risk_from_coeffs(rc, grid[j]); });
            jhats[r] = jhat;
            exc[r] = std::max(0.0, rhat(grid[jhat]) - rmin);
        });
        rep.excess_median.push_back(stats::median(exc));
        rep.excess_q10.push_back(stats::quantile(exc, 0.10));
        rep.excess_q90.push_back(stats::quantile(exc, 0.90));

        if (g == 0) {
            // Shared-trajectory noise of the excess: SE of the per-trajectory
            // risk difference between the fitted region and the surface
            // minimizer (design rule: below 5% of the smallest-n excess).
            std::vector<double> disp;
            for (std::size_t jh : jhats)
                disp.push_back(std::fabs(grid[jh] - grid[imin]));
            double typical = stats::median(disp);
            double theta_b = grid[imin] + (grid[imin] + typical <= grid.back() ? typical : -typical);
            std::vector<double> diffs(static_cast<std::size_t>(N_pop_g));
            for (long r = 0; r < N_pop_g; ++r) {
                double sa = 0.0, sb = 0.0;
                std::size_t off = static_cast<std::size_t>(r) * terms;
                for (std::size_t i = 0; i < terms; ++i) {
                    sa += std::fabs(A[off + i] + grid[imin] * Bc[off + i]);
                    sb += std::fabs(A[off + i] + theta_b * Bc[off + i]);
                }
                diffs[static_cast<std::size_t>(r)] = (sb - sa) / static_cast<double>(terms);
            }
            rep.pop_se_ratio = stats::sample_sd(diffs) / std::sqrt(static_cast<double>(N_pop_g));
        }
    }

    // The excess-risk statement is a high-probability bound, so the constant
    // is calibrated once, at the smallest horizon, as the 90% quantile of the
    // observed excess; domination is then checked per repetition at the rest.
    double shape0 = envelope_shape(n_grid.front(), prob.alpha);
    double chat = stats::quantile(rep.excess[0], 0.90) / shape0;
    for (long r = 0; r < reps; ++r) {
        bool dominated = true;
        for (std::size_t g = 1; g < n_grid.size(); ++g) {
            double cap = chat * envelope_shape(n_grid[g], prob.alpha);
            if (rep.excess[g][static_cast<std::size_t>(r)] > cap + 1e-15) dominated = false;
        }
        if (dominated) ++rep.domination_count;
    }
    for (long ng : n_grid) rep.fitted_envelope.push_back(chat * envelope_shape(ng, prob.alpha));
    if (rep.excess_median.front() > 0.0) rep.pop_se_ratio /= rep.excess_median.front();
    return rep;
}

}  // namespace nhmc

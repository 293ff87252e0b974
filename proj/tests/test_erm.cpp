#include <doctest.h>

#include <cmath>

#include "nhmc/erm.hpp"
#include "nhmc/stats.hpp"

using namespace nhmc;

namespace {

ERMProblem gaussian_problem() {
    return make_erm_problem(0.2, 0.8, 0.5, 0.25, NoiseSpec::gaussian(1.0), 1.0);
}

ERMProblem noiseless_problem() {
    return make_erm_problem(0.2, 0.8, 0.5, 0.25, NoiseSpec::two_atom(0.0, 0.0, 0.5), 1.0);
}

}  // namespace

TEST_CASE("problem validation") {
    CHECK_THROWS(make_erm_problem(0.0, 0.8, 0.5, 0.25, NoiseSpec::gaussian(1.0), 1.0));
    CHECK_THROWS(make_erm_problem(0.2, 0.8, 0.9, 0.25, NoiseSpec::gaussian(1.0), 1.0));
    CHECK_THROWS(make_erm_problem(0.2, 0.8, 0.5, 0.5, NoiseSpec::gaussian(1.0), 1.0));
    CHECK_THROWS(erm_grid(gaussian_problem(), 1));
    ERMProblem coarse = gaussian_problem();
    coarse.eps_grid = 0.5;  // above 1/(L n) for any n >= 2
    CHECK_THROWS(erm_grid(coarse, 100));
}

TEST_CASE("grid spacing follows the 1/(L n) rule") {
    auto prob = gaussian_problem();
    for (long n : {10L, 100L, 1000L}) {
        auto grid = erm_grid(prob, n);
        REQUIRE(grid.size() >= 2);
        CHECK(grid.front() == doctest::Approx(0.2));
        CHECK(grid.back() == doctest::Approx(0.8));
        for (std::size_t i = 1; i < grid.size(); ++i)
            CHECK(grid[i] - grid[i - 1] <= 1.0 / static_cast<double>(n) + 1e-12);
    }
}

TEST_CASE("empirical risk of the generating parameter vanishes without noise") {
    auto prob = noiseless_problem();
    auto traj = simulate(erm_chain(prob), 50, 1);
    CHECK(empirical_risk(prob, 0.5, traj) == doctest::Approx(0.0));
    CHECK(empirical_risk(prob, 0.7, traj) > 0.0);

    // one-step check: X_2 = (1 - theta0/2^alpha) X_1 exactly
    double f2 = (1.0 - 0.5 / std::pow(2.0, 0.25)) * 1.0;
    CHECK(traj[1][0] == doctest::Approx(f2));
}

TEST_CASE("empirical risk is convex in theta") {
    auto prob = gaussian_problem();
    auto traj = simulate(erm_chain(prob), 100, 17);
    auto grid = erm_grid(prob, 100);
    for (std::size_t i = 2; i < grid.size(); i += 3) {
        double a = empirical_risk(prob, grid[i - 2], traj);
        double b = empirical_risk(prob, grid[i - 1], traj);
        double c = empirical_risk(prob, grid[i], traj);
        CHECK(b <= 0.5 * (a + c) + 1e-12);
    }
}

TEST_CASE("grid argmin matches a full scan with ties toward smaller theta") {
    auto prob = gaussian_problem();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        long n = 50 + 37 * static_cast<long>(seed);
        auto traj = simulate(erm_chain(prob), n, seed);
        double fitted = erm_fit(prob, traj);
        auto grid = erm_grid(prob, n);
        std::size_t best = 0;
        double fbest = empirical_risk(prob, grid[0], traj);
        for (std::size_t j = 1; j < grid.size(); ++j) {
            double v = empirical_risk(prob, grid[j], traj);
            if (v < fbest) {
                fbest = v;
                best = j;
            }
        }
        REQUIRE(fitted == grid[best]);
        for (double theta : grid)
            REQUIRE(empirical_risk(prob, fitted, traj) <= empirical_risk(prob, theta, traj) + 1e-15);
    }
}

TEST_CASE("noiseless fit lands on the grid point nearest theta0") {
    auto prob = noiseless_problem();
    auto traj = simulate(erm_chain(prob), 40, 3);
    double fitted = erm_fit(prob, traj);
    auto grid = erm_grid(prob, 40);
    double nearest = grid[0];
    for (double g : grid)
        if (std::fabs(g - prob.theta0) < std::fabs(nearest - prob.theta0)) nearest = g;
    CHECK(fitted == doctest::Approx(nearest));

    ERMProblem single = make_erm_problem(0.4, 0.4, 0.4, 0.25, NoiseSpec::gaussian(1.0), 1.0);
    CHECK(erm_grid(single, 100).size() == 1);
    CHECK(erm_fit(single, simulate(erm_chain(single), 30, 4)) == doctest::Approx(0.4));
}

TEST_CASE("population risk separates parameters") {
    auto prob = gaussian_problem();
    CHECK(population_risk(noiseless_problem(), 0.5, 100, 50, 5).value == doctest::Approx(0.0));
    auto at_true = population_risk(prob, 0.5, 200, 2000, 5);
    auto far = population_risk(prob, 0.8, 200, 2000, 5);
    CHECK(far.value > at_true.value + 2.0 * (at_true.se + far.se));
    // seed stability within two standard errors
    auto again = population_risk(prob, 0.5, 200, 2000, 6);
    CHECK(std::fabs(again.value - at_true.value) <= 2.0 * (at_true.se + again.se));
}

TEST_CASE("covering entropy bookkeeping for the scalar family") {
    auto prob = gaussian_problem();
    for (long n : {4L, 10L, 100L, 1000L}) {
        double h = covering_entropy(prob, 1.0 / static_cast<double>(n));
        double mid = std::log(1.0 + (prob.theta_hi - prob.theta_lo) * static_cast<double>(n));
        CHECK(h <= std::max(1.0, mid) + 1e-12);
        CHECK(std::max(1.0, mid) <= 2.0 * std::log(static_cast<double>(n)) + 1e-12);
    }
}

TEST_CASE("excess risk experiment on a small grid") {
    auto prob = gaussian_problem();
    auto rep = excess_risk_experiment(prob, {100, 400}, 200, 8, 77);
    REQUIRE(rep.excess.size() == 2);
    for (const auto& per_n : rep.excess)
        for (double e : per_n) REQUIRE(e >= 0.0);
    CHECK(rep.excess_median[1] < rep.excess_median[0]);
    CHECK(rep.fitted_envelope.size() == 2);

    auto zero = excess_risk_experiment(noiseless_problem(), {100, 400}, 100, 4, 78);
    CHECK(zero.excess_median[0] == doctest::Approx(0.0));
    CHECK(zero.excess_median[1] == doctest::Approx(0.0));
}

#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "nhmc/chains.hpp"
#include "nhmc/stats.hpp"
#include "support/oracles.hpp"

using namespace nhmc;

namespace {

InitSpec at_zero() { return InitSpec::point(Vec{0.0}); }

}  // namespace

TEST_CASE("model constructors attach the implied schedule") {
    auto ex5 = make_linear_sa_additive(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.5,
                                       NoiseSpec::gaussian(1.0), at_zero(), 2.0);
    auto t = ex5.schedule.eval(9);  // 9^0.5 = 3
    CHECK(t.rho == doctest::Approx(1.0 - 0.5 / 3.0));
    CHECK(t.tau == doctest::Approx(0.5));
    CHECK(t.xi == 0.0);
    CHECK(ex5.schedule.regime() == Regime::C16);

    auto ex3 = make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.0, NoiseSpec::gaussian(1.0),
                              at_zero(), 2.0);
    CHECK(ex3.schedule.eval(17).rho == doctest::Approx(0.5));
    CHECK(ex3.schedule.eval(17).tau == doctest::Approx(0.5));
    CHECK(ex3.schedule.regime() == Regime::C15);

    auto ex4 = make_linear_sa_scaled_noise(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.75,
                                           NoiseSpec::gaussian(1.0), at_zero(), 2.0);
    CHECK(ex4.schedule.regime() == Regime::C17);

    // identical strong convexity and smoothness make rho_n = 1 - m gamma / n^alpha
    std::vector<QuadraticTerm> terms = {{1.0, Vec{0.5}}, {1.0, Vec{-0.5}}};
    auto ex6 = make_projected_sgd(terms, 1, 2.0, 0.4, 0.25, std::nullopt, at_zero());
    CHECK(ex6.schedule.eval(16).rho == doctest::Approx(1.0 - 1.0 * 0.4 / 2.0));
    CHECK(ex6.schedule.eval(16).xi == doctest::Approx(2.0 * ex6.grad_bound * 0.4 / 2.0));

    // every model schedule passes regime validation over a long horizon
    for (long n = 2; n <= 500; ++n) {
        ex3.schedule.eval(n);
        ex4.schedule.eval(n);
        ex5.schedule.eval(n);
        ex6.schedule.eval(n);
    }
}

TEST_CASE("constructor constraint violations are rejected by name") {
    CHECK_THROWS_WITH_AS(make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 1.5, 0.0,
                                        NoiseSpec::gaussian(1.0), at_zero(), 2.0),
                         doctest::Contains("gamma lambda_min"), std::invalid_argument);
    CHECK_THROWS(make_unit_root(1.5, 0.5, false, NoiseSpec::gaussian(1.0), at_zero()));
    std::vector<QuadraticTerm> steep = {{4.0, Vec{0.0}}};
    CHECK_THROWS_WITH_AS(make_projected_sgd(steep, 1, 1.0, 0.5, 0.0, std::nullopt, at_zero()),
                         doctest::Contains("2 m gamma - l^2 gamma^2"), std::invalid_argument);
    auto inner_bad = make_functional_ar(Mat::scalar(0.5), Vec{0.0}, NoiseSpec::gaussian(1.0),
                                        at_zero(), 2.0);
    CHECK_THROWS(make_subsampled(inner_bad, {2, 3}));  // unbounded innovations
}

TEST_CASE("step applies the example maps") {
    // additive solver: (1 - gamma A / n^a) x + gamma B / n^a - gamma eps
    auto ex5 = make_linear_sa_additive(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.5,
                                       NoiseSpec::gaussian(1.0), InitSpec::point(Vec{1.0}), 2.0);
    NoiseDraw d;
    d.value = {0.25};
    CHECK(apply_step(ex5, 4, Vec{1.0}, d)[0] == doctest::Approx(0.75 - 0.125));
    d.value = {0.0};
    CHECK(apply_step(ex5, 4, Vec{1.0}, d)[0] == doctest::Approx(0.75));  // noiseless decay

    auto proj = make_projected_linear_sa(Mat::scalar(0.5), Vec{0.0}, 0.5, 0.0, 1.0,
                                         NoiseSpec::gaussian(1.0), at_zero());
    d.value = {-40.0};
    CHECK(lp_norm(apply_step(proj, 2, Vec{0.9}, d), 2.0) == doctest::Approx(1.0));
}

TEST_CASE("simulate is deterministic per seed and stable for the unit root") {
    auto m = make_unit_root(0.5, 0.5, true, NoiseSpec::gaussian(1.0), at_zero());
    auto t1 = simulate(m, 200, 7ULL);
    auto t2 = simulate(m, 200, 7ULL);
    CHECK(t1 == t2);
    auto t3 = simulate(m, 200, 8ULL);
    CHECK(t1 != t3);

    auto long_run = simulate(m, 10000, 21ULL);
    for (const auto& x : long_run) REQUIRE(std::isfinite(x[0]));
}

TEST_CASE("dominating variable closed forms") {
    auto pm1 = make_functional_ar(Mat::scalar(0.5), Vec{0.0}, NoiseSpec::uniform_pm1(1), at_zero(),
                                  2.0);
    CHECK(g_eps(pm1, Vec{1.0}) == doctest::Approx(1.0));
    CHECK(g_x1(pm1, Vec{0.0}) == 0.0);
    CHECK(g_x1(pm1, Vec{3.0}) == doctest::Approx(3.0));

    auto ga = make_functional_ar(Mat::scalar(0.5), Vec{0.0}, NoiseSpec::gaussian(1.0), at_zero(),
                                 2.0);
    CHECK(g_eps(ga, Vec{0.0}) == doctest::Approx(std::sqrt(2.0 / M_PI)));
    // cross-check the folded-normal mean against Monte-Carlo
    rng::Stream stream(3141);
    double acc = 0.0;
    const long N = 200000;
    for (long i = 0; i < N; ++i) acc += std::fabs(0.7 - stream.next_normal());
    double mc = acc / static_cast<double>(N);
    CHECK(g_eps(ga, Vec{0.7}) == doctest::Approx(mc).epsilon(0.01));

    auto two = make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.0,
                              NoiseSpec::two_atom(1.0, -1.0, 0.25), at_zero(), 2.0);
    CHECK(g_eps(two, Vec{1.0}) == doctest::Approx(0.25 * 0.0 + 0.75 * 2.0));

    auto bu = make_functional_ar(Mat::scalar(0.5), Vec{0.0}, NoiseSpec::bounded_uniform(0.0, 1.0),
                                 at_zero(), 2.0);
    CHECK(g_eps(bu, Vec{0.0}) == doctest::Approx(0.5));
    CHECK(g_eps(bu, Vec{0.5}) == doctest::Approx(0.25));
    CHECK(g_eps(bu, Vec{2.0}) == doctest::Approx(1.5));
}

TEST_CASE("g_eps tail function") {
    auto ga = make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.0, NoiseSpec::gaussian(1.0),
                             at_zero(), 2.0);
    double g0 = std::sqrt(2.0 / M_PI);
    CHECK(g_eps_tail(ga, 0.5 * g0) == doctest::Approx(1.0));
    // G(eps) > t iff |eps| > h^{-1}(t); at t = h(1) the tail is 2 Phi(-1)
    double t1 = g_eps(ga, Vec{1.0});
    CHECK(g_eps_tail(ga, t1) == doctest::Approx(2.0 * stats::normal_cdf(-1.0)).epsilon(1e-6));

    auto pm1 = make_functional_ar(Mat::scalar(0.5), Vec{0.0}, NoiseSpec::uniform_pm1(1), at_zero(),
                                  2.0);
    CHECK(g_eps_tail(pm1, 0.5) == 1.0);
    CHECK(g_eps_tail(pm1, 1.5) == 0.0);
}

TEST_CASE("derive_constants certifies valid moment hypotheses") {
    auto pm1 = make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.0, NoiseSpec::uniform_pm1(1),
                              at_zero(), 2.0);
    auto bern = derive_constants(pm1, BoundKind::Bernstein);
    CHECK(bern.H1 == doctest::Approx(1.0));  // G == 1 a.s.
    CHECK(bern.A1 == doctest::Approx(1.0));
    CHECK(!bern.estimated);
    CHECK(bern.init_tail.kind == InitialTailSpec::Kind::Deterministic);
    CHECK(derive_constants(pm1, BoundKind::McDiarmid).T1 == doctest::Approx(2.0));
    CHECK(derive_constants(pm1, BoundKind::Hoeffding).T == doctest::Approx(1.0));
    CHECK(derive_constants(pm1, BoundKind::FukNagaev, 4.0).B1q == doctest::Approx(1.0));

    auto ga = make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.0, NoiseSpec::gaussian(1.0),
                             at_zero(), 2.0);
    auto gb = derive_constants(ga, BoundKind::Bernstein);
    CHECK(gb.H1 == doctest::Approx(2.0));
    CHECK(gb.A1 == doctest::Approx(4.0));
    CHECK(!gb.estimated);
    auto se = derive_constants(ga, BoundKind::SemiExp, 0.5);
    CHECK(se.estimated);  // Monte-Carlo with 3 SE inflation
    CHECK(se.A1_semi > 0.0);
    CHECK_THROWS(derive_constants(ga, BoundKind::McDiarmid));

    // derived Gaussian moment bounds really dominate the Monte-Carlo moments
    rng::Stream stream(777);
    double m2 = 0.0, m4 = 0.0;
    const long N = 200000;
    for (long i = 0; i < N; ++i) {
        double g = g_eps(ga, Vec{stream.next_normal()});
        m2 += g * g;
        m4 += g * g * g * g;
    }
    m2 /= static_cast<double>(N);
    m4 /= static_cast<double>(N);
    CHECK(m2 <= derive_constants(ga, BoundKind::Hoeffding).A1_fn);
    CHECK(m4 <= derive_constants(ga, BoundKind::FukNagaev, 4.0).B1q);
}

TEST_CASE("contraction verification") {
    auto ex5 = make_linear_sa_additive(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.5,
                                       NoiseSpec::gaussian(1.0), at_zero(), 2.0);
    auto rep = verify_contraction(ex5, 9, 1000, 5);
    CHECK(rep.ok);
    for (const auto& p : rep.probes) {
        CHECK(p.mean_ratio == doctest::Approx(1.0 - 0.5 / 3.0));  // linear map: exact ratio
        CHECK(p.se == doctest::Approx(0.0));
    }

    std::vector<QuadraticTerm> terms = {{1.0, Vec{0.5}}, {1.0, Vec{-0.25}}};
    auto sgd = make_projected_sgd(terms, 1, 2.0, 0.4, 0.25, NoiseSpec::gaussian(0.3), at_zero());
    auto rep6 = verify_contraction(sgd, 4, 2000, 6);
    CHECK(rep6.ok);

    auto proj = make_projected_linear_sa(Mat::scalar(1.0), Vec{0.25}, 0.5, 0.25, 1.5,
                                         NoiseSpec::gaussian(1.0), at_zero());
    auto repp = verify_contraction(proj, 3, 2000, 7);
    CHECK(repp.c2_ok);
    CHECK(repp.max_c2_residual <= repp.xi_n + 1e-9);
}

TEST_CASE("exact mean recursion matches Monte-Carlo means") {
    auto m = make_linear_sa(Mat::scalar(0.8), Vec{0.4}, 0.5, 0.25, NoiseSpec::gaussian(1.0),
                            InitSpec::point(Vec{2.0}), 2.0);
    auto means = exact_mean_trajectory(m, 100);
    REQUIRE(means.has_value());
    const long N = 100000;
    for (long n : {10L, 100L}) {
        std::vector<double> vals(static_cast<std::size_t>(N));
        for (long r = 0; r < N; ++r) {
            auto stream = rng::replication_stream(1234, static_cast<std::uint64_t>(r));
            vals[static_cast<std::size_t>(r)] = simulate(m, n, stream).back()[0];
        }
        double mc = stats::mean(vals);
        double se = stats::sample_sd(vals) / std::sqrt(static_cast<double>(N));
        CHECK(std::fabs(mc - (*means)[static_cast<std::size_t>(n - 1)][0]) <= 4.0 * se);
    }
}

TEST_CASE("subsampled chains compose the inner map over the gaps") {
    auto inner = make_functional_ar(Mat::scalar(0.5), Vec{0.1}, NoiseSpec::uniform_pm1(1),
                                    at_zero(), 2.0);
    auto sub = make_subsampled(inner, {3, 1, 2});
    CHECK(sub.schedule.eval(2).rho == doctest::Approx(0.125));
    CHECK(sub.schedule.eval(3).rho == doctest::Approx(0.5));
    CHECK(sub.schedule.eval(2).tau == doctest::Approx((1.0 - 0.125) / 0.5));
    CHECK(sub.schedule.max_n() == 4);

    NoiseDraw block;
    block.block = {Vec{1.0}, Vec{-1.0}, Vec{1.0}};
    double x = 0.7;
    double expect = x;
    for (double e : {1.0, -1.0, 1.0}) expect = 0.5 * expect + 0.1 + e;
    CHECK(apply_step(sub, 2, Vec{x}, block)[0] == doctest::Approx(expect));

    // block metric: G is a.s. the pair diameter of the inner law
    CHECK(g_eps(sub, Vec{}) == doctest::Approx(2.0));
    CHECK(derive_constants(sub, BoundKind::McDiarmid).T1 == doctest::Approx(2.0));
}

TEST_CASE("matrix models use the symmetric spectrum") {
    Mat A(2);
    A.at(0, 0) = 1.0;
    A.at(1, 1) = 2.0;
    A.at(0, 1) = A.at(1, 0) = 0.3;
    auto m = make_linear_sa(A, Vec{0.0, 0.0}, 0.4, 0.0, NoiseSpec::gaussian(1.0, 2),
                            InitSpec::point(Vec{0.0, 0.0}), 2.0);
    double disc = std::sqrt(0.25 + 0.09);
    CHECK(m.lambda_min == doctest::Approx(1.5 - disc));
    CHECK(m.lambda_max == doctest::Approx(1.5 + disc));
    CHECK_THROWS(make_linear_sa(A, Vec{0.0, 0.0}, 0.4, 0.0, NoiseSpec::gaussian(1.0, 2),
                                InitSpec::point(Vec{0.0, 0.0}), 3.0));  // p != 2 with a matrix
}

#include <doctest.h>

#include <cmath>

#include "nhmc/coefficients.hpp"
#include "nhmc/moments.hpp"
#include "nhmc/rng.hpp"
#include "support/oracles.hpp"

using namespace nhmc;

namespace {

// Explicit per-n sequences for constants tests (index 0 is n = 2).
Schedule seq_schedule(std::vector<double> rho, std::vector<double> tau, std::vector<double> xi) {
    CustomSequences s;
    s.rho = std::move(rho);
    s.tau = std::move(tau);
    s.xi = std::move(xi);
    return make_schedule(Regime::Custom, 0.0, 0.0, 0.0, s);
}

}  // namespace

TEST_CASE("compute_K examples") {
    auto zero = seq_schedule({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0});
    auto K0 = compute_K(zero, 4);
    for (long k = 1; k <= 4; ++k) CHECK(K0.at(k) == doctest::Approx(1.0));

    auto half = seq_schedule({0.5, 0.5}, {1.0, 1.0}, {0.0, 0.0});
    auto K = compute_K(half, 3);
    CHECK(K.at(1) == doctest::Approx(1.75));
    CHECK(K.at(2) == doctest::Approx(1.5));
    CHECK(K.at(3) == doctest::Approx(1.0));

    auto s = make_schedule(Regime::C16, 0.3, 0.4, 1.0);
    CHECK(compute_K(s, 57).at(57) == doctest::Approx(1.0));
    CHECK_THROWS(compute_K(s, 1));
}

TEST_CASE("K table matches the direct series and respects its bounds") {
    rng::Stream gen(99);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> r, t, x;
        for (int i = 0; i < 30; ++i) {
            r.push_back(0.99 * gen.next_uniform());
            t.push_back(2.0 * gen.next_uniform());
            x.push_back(gen.next_uniform());
        }
        auto s = seq_schedule(r, t, x);
        for (long n : {2L, 7L, 31L}) {
            auto K = compute_K(s, n);
            for (long k = 1; k <= n; ++k) {
                double direct = testsupport::direct_series_K(s, k, n);
                REQUIRE(std::fabs(K.at(k) - direct) <= 1e-12 * std::max(1.0, direct));
                REQUIRE(K.at(k) >= 1.0);
                REQUIRE(K.at(k) <= static_cast<double>(n - k) + 1.0);
                if (k < n) REQUIRE(K.at(k) <= 1.0 + s.eval(k + 1).rho * static_cast<double>(n - k));
            }
        }
    }
}

TEST_CASE("Bernstein constants") {
    MomentConstants mc;
    mc.H1 = 1.0;
    mc.A1 = 1.0;
    auto s = seq_schedule({0.0}, {1.0}, {0.0});
    auto bc = constants_bernstein(compute_K(s, 2), s, mc);
    CHECK(bc.V2 == doctest::Approx(8.0));
    CHECK(bc.delta == doctest::Approx(2.0));

    auto noiseless = seq_schedule({0.3, 0.3}, {0.0, 0.0}, {0.0, 0.0});
    auto bc0 = constants_bernstein(compute_K(noiseless, 3), noiseless, mc);
    CHECK(bc0.V2 == 0.0);
    CHECK(bc0.delta == 0.0);

    // C15 with alpha = 0: V_n^2 / n stays bounded as n grows
    auto c15 = make_schedule(Regime::C15, 0.0, 0.5, 1.0);
    double prev = 0.0;
    for (long n : {100L, 400L, 1600L}) {
        auto b = constants_bernstein(compute_K(c15, n), c15, mc);
        double per_n = b.V2 / static_cast<double>(n);
        if (prev > 0.0) CHECK(per_n / prev < 1.2);
        prev = per_n;
    }
    MomentConstants missing;
    CHECK_THROWS(constants_bernstein(compute_K(s, 2), s, missing));
}

TEST_CASE("semi-exponential constants") {
    MomentConstants mc;
    mc.A1_semi = 1.0;
    mc.Eexp_q = 1.0;
    auto s = seq_schedule({0.0}, {1.0}, {0.0});
    auto bc = constants_semiexp(compute_K(s, 2), s, mc, 0.5);
    CHECK(bc.V2 == doctest::Approx(2.0 * std::exp(1.0)));
    CHECK(bc.delta == doctest::Approx(1.0));

    mc.Eexp_q = std::exp(1.0);
    auto sx = seq_schedule({0.0}, {0.0}, {1.0});
    auto bcx = constants_semiexp(compute_K(sx, 2), sx, mc, 0.5);
    CHECK(bcx.V2 == doctest::Approx(2.0 * std::exp(2.0)));

    auto s0 = seq_schedule({0.0}, {0.0}, {0.0});
    CHECK(constants_semiexp(compute_K(s0, 2), s0, mc, 0.5).V2 == 0.0);
    CHECK_THROWS(constants_semiexp(compute_K(s, 2), s, mc, 1.0));
}

TEST_CASE("Fuk-Nagaev constants and the H_n(2) = V_n^2 identity") {
    MomentConstants mc;
    mc.A1_fn = 0.7;
    mc.B1q = 0.7;  // B_1(2) = A_1 makes H_n(2) = V_n^2
    auto s = seq_schedule({0.3, 0.6, 0.1}, {1.0, 0.5, 2.0}, {0.2, 0.0, 1.0});
    auto bc = constants_fuk_nagaev(compute_K(s, 4), s, mc, 2.0);
    CHECK(bc.Hq == doctest::Approx(bc.V2).epsilon(1e-12));

    MomentConstants mc3;
    mc3.A1_fn = 1.0;
    mc3.B1q = 2.0;
    auto s2 = seq_schedule({0.0}, {1.0}, {0.0});
    CHECK(constants_fuk_nagaev(compute_K(s2, 2), s2, mc3, 3.0).Hq == doctest::Approx(8.0));

    auto s0 = seq_schedule({0.5}, {0.0}, {0.0});
    auto bc0 = constants_fuk_nagaev(compute_K(s0, 2), s0, mc3, 2.0);
    CHECK(bc0.Hq == 0.0);
    CHECK(bc0.V2 == 0.0);
    CHECK_THROWS(constants_fuk_nagaev(compute_K(s2, 2), s2, mc3, 1.5));
}

TEST_CASE("von Bahr-Esseen constants") {
    MomentConstants mc;
    mc.A1q = 1.0;
    auto s = seq_schedule({0.0}, {1.0}, {0.0});
    CHECK(constants_vbe(compute_K(s, 2), s, mc, 2.0).Vq == doctest::Approx(2.0));

    // q = 1 exponent simplification: Vq = K2(tau2 A + xi2) + 2 sum_{k>=3} Kk(tauk A + xik)
    auto s4 = seq_schedule({0.3, 0.4, 0.5}, {1.0, 0.7, 0.2}, {0.1, 0.0, 0.3});
    auto K = compute_K(s4, 4);
    double expect = K.at(2) * (1.0 * 1.0 + 0.1);
    expect += 2.0 * K.at(3) * (0.7 + 0.0);
    expect += 2.0 * K.at(4) * (0.2 + 0.3);
    CHECK(constants_vbe(K, s4, mc, 1.0).Vq == doctest::Approx(expect));

    auto s0 = seq_schedule({0.5}, {0.0}, {0.0});
    CHECK(constants_vbe(compute_K(s0, 2), s0, mc, 1.5).Vq == 0.0);
    CHECK_THROWS(constants_vbe(compute_K(s, 2), s, mc, 2.5));
}

TEST_CASE("weak-moment constants and C_{d,q}") {
    MomentConstants mc;
    mc.A1q = 1.0;
    auto s = seq_schedule({0.0}, {1.0}, {0.0});
    CHECK(constants_weak(compute_K(s, 2), s, mc, 1.5).Bq == doctest::Approx(std::pow(2.0, 1.5)));
    CHECK(weak_moment_cdq(1, 1.5) == doctest::Approx(std::pow(2.0, 3.5) * 7.0));
    auto s0 = seq_schedule({0.5}, {0.0}, {0.0});
    CHECK(constants_weak(compute_K(s0, 2), s0, mc, 1.5).Bq == 0.0);
    CHECK_THROWS(constants_weak(compute_K(s, 2), s, mc, 2.0));
    CHECK_THROWS(constants_weak(compute_K(s, 2), s, mc, 1.0));
}

TEST_CASE("McDiarmid constants with the Cauchy-Schwarz sanity bound") {
    MomentConstants mc;
    mc.T1 = 2.0;
    auto s = seq_schedule({0.0}, {1.0}, {0.0});
    auto bc = constants_mcdiarmid(compute_K(s, 2), s, mc);
    CHECK(bc.D == doctest::Approx(2.0));
    CHECK(bc.V2 == doctest::Approx(4.0));

    MomentConstants mc1;
    mc1.T1 = 1.0;
    auto s3 = seq_schedule({0.9, 0.5}, {1.0, 1.0}, {0.0, 0.0});  // K = (., 1.5, 1)
    auto b3 = constants_mcdiarmid(compute_K(s3, 3), s3, mc1);
    CHECK(b3.D == doctest::Approx(2.5));
    CHECK(b3.V2 == doctest::Approx(3.25));

    // V^2 <= D * max_k K_k (tau_k T1 + xi_k)
    auto K = compute_K(s3, 3);
    double mx = 0.0;
    for (long k = 2; k <= 3; ++k) {
        auto t = s3.eval(k);
        mx = std::max(mx, K.at(k) * (t.tau * mc1.T1 + t.xi));
    }
    CHECK(b3.V2 <= b3.D * mx + 1e-12);

    auto s0 = seq_schedule({0.5}, {0.0}, {0.0});
    CHECK(constants_mcdiarmid(compute_K(s0, 2), s0, mc).D == 0.0);
    MomentConstants missing;
    CHECK_THROWS(constants_mcdiarmid(compute_K(s, 2), s, missing));
}

TEST_CASE("Hoeffding constants") {
    MomentConstants mc;
    mc.A1_fn = 1.0;
    auto s = seq_schedule({0.0}, {1.0}, {0.0});
    auto bc = constants_hoeffding(compute_K(s, 2), s, mc);
    CHECK(bc.V2 == doctest::Approx(2.0));
    CHECK(bc.delta == doctest::Approx(1.0));

    auto sx = seq_schedule({0.0}, {0.0}, {3.0});
    auto bx = constants_hoeffding(compute_K(sx, 2), sx, mc);
    CHECK(bx.delta == doctest::Approx(3.0));  // 3 K[2]

    auto s0 = seq_schedule({0.5}, {0.0}, {0.0});
    auto b0 = constants_hoeffding(compute_K(s0, 2), s0, mc);
    CHECK(b0.V2 == 0.0);
    CHECK(b0.delta == 0.0);
}

TEST_CASE("Marcinkiewicz-Zygmund constants") {
    MomentConstants mc;
    mc.B1q = 1.0;
    mc.B1q_init = 1.0;
    auto s = seq_schedule({0.5}, {1.0}, {0.0});  // K = (1.5, 1)
    auto K = compute_K(s, 2);
    CHECK(constants_mz(K, s, mc, 2.0).Tq == doctest::Approx(4.25));

    MomentConstants mc0;
    mc0.B1q = 1.0;
    mc0.init_moment_known = true;  // deterministic start, zero initial moment
    auto s0 = seq_schedule({0.5}, {0.0}, {0.0});
    auto K0 = compute_K(s0, 2);
    CHECK(constants_mz(K0, s0, mc0, 2.0).Tq == doctest::Approx(0.0));
    mc0.B1q_init = 1.0;
    CHECK(constants_mz(K0, s0, mc0, 2.0).Tq == doctest::Approx(K0.at(1) * K0.at(1)));
    CHECK_THROWS(constants_mz(K, s, mc, 1.5));
}

TEST_CASE("von Bahr-Esseen moment constants") {
    MomentConstants mc;
    mc.A1q = 1.0;
    mc.A1q_init = 1.0;
    auto s = seq_schedule({0.5}, {1.0}, {0.0});  // K = (1.5, 1)
    auto K = compute_K(s, 2);
    CHECK(constants_vbe_moment(K, s, mc, 1.0).Vq == doctest::Approx(3.5));
    CHECK(constants_vbe_moment(K, s, mc, 2.0).Vq == doctest::Approx(4.25));

    MomentConstants mc0;
    mc0.A1q = 1.0;
    mc0.A1q_init = 1.0;
    auto s0 = seq_schedule({0.5}, {0.0}, {0.0});
    auto K0 = compute_K(s0, 2);
    CHECK(constants_vbe_moment(K0, s0, mc0, 1.5).Vq ==
          doctest::Approx(std::pow(K0.at(1), 1.5)));
    CHECK_THROWS(constants_vbe_moment(K, s, mc, 0.5));
}

TEST_CASE("moment-norm bound displays") {
    CHECK(mz_moment_bound(4.25, 1, 2.0) == doctest::Approx(std::sqrt(4.25)));
    CHECK(mz_moment_bound(0.0, 3, 4.0) == 0.0);
    CHECK(mz_moment_bound(1.0, 16, 2.0) == doctest::Approx(4.0));
    CHECK(vbe_moment_bound(3.5, 1, 1.0) == doctest::Approx(3.5));
    CHECK(vbe_moment_bound(0.0, 2, 1.5) == 0.0);
    CHECK(vbe_moment_bound(1.0, 4, 2.0) == doctest::Approx(2.0));
    CHECK_THROWS(mz_moment_bound(1.0, 1, 1.5));
    CHECK_THROWS(vbe_moment_bound(1.0, 1, 2.5));
}

TEST_CASE("asymptotics report carries the regime lemma bounds") {
    // alpha = 0, rho = 0.5: K_{k,n} tau_k < 1/rho = 2
    auto c15 = make_schedule(Regime::C15, 0.0, 0.5, 1.0);
    auto rep = asymptotics_report(c15, {100, 1000});
    for (const auto& row : rep.rows) CHECK(row.max_K_tau_over_ka <= 2.0);
    CHECK(rep.log_product_ok);

    // C17, alpha = 1, rho = 0.5: K_{k,n} < 1/(1-rho) = 2
    auto c17 = make_schedule(Regime::C17, 1.0, 0.5, 1.0);
    auto rep17 = asymptotics_report(c17, {100, 1000});
    for (const auto& row : rep17.rows) CHECK(row.K1n <= 2.0);

    auto custom = make_schedule(Regime::Custom, 0.0, 0.0, 0.0,
                                CustomSequences{{0.5}, {1.0}, {0.0}});
    CHECK_THROWS(asymptotics_report(custom, {2}));
}

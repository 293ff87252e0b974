#include <doctest.h>

#include <cmath>

#include "nhmc/envelopes.hpp"

using namespace nhmc;

TEST_CASE("initial-state term") {
    CHECK(i1_term(5.0, 1.0, 1, InitialTailSpec::deterministic()) == 0.0);
    CHECK(i1_term(2.0, 1.0, 1, InitialTailSpec::exp_tail(1.0)) == doctest::Approx(std::exp(-1.0)));
    CHECK(i1_term(4.0, 1.0, 2, InitialTailSpec::poly_tail(1.0, 2.0)) == doctest::Approx(0.5));
    auto bd = InitialTailSpec::bounded_diameter(1.0);
    CHECK(i1_term(2.1, 1.0, 3, bd) == 0.0);
    CHECK(i1_term(1.9, 1.0, 3, bd) == 1.0);
    CHECK_THROWS(i1_term(0.0, 1.0, 1, bd));
}

TEST_CASE("Young transform of Rio's function") {
    for (double x : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        double closed = (x * x - 2.0 * x) * std::log1p(-x);
        CHECK(ell_star_numeric(x) >= closed - 1e-9);
        CHECK(closed >= 2.0 * x * x - 1e-12);
        CHECK(ell_star(x) >= 2.0 * x * x);
    }
    CHECK(ell_star_numeric(0.0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(ell_star(0.5) >= 0.51986 - 1e-4);
    CHECK(std::isinf(ell_star(1.0)));
    CHECK(ell(1e-9) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("Bernstein envelope values and form ordering") {
    BoundConstants bc;
    bc.kind = BoundKind::Bernstein;
    bc.V2 = 1.0;
    bc.delta = 1.0;
    auto det = InitialTailSpec::deterministic();
    auto refined = bernstein_envelope(bc, 1, 2.0, 1.0, det, BernsteinForm::Refined);
    auto relaxed = bernstein_envelope(bc, 1, 2.0, 1.0, det, BernsteinForm::Relaxed);
    CHECK(relaxed.eval(0.0) == 1.0);
    CHECK(relaxed.eval(10.0) == doctest::Approx(2.0 * std::exp(-25.0 / 12.0)));
    for (double u = 0.25; u < 40.0; u += 0.25)
        CHECK(refined.eval(u) <= relaxed.eval(u) + 1e-15);

    BoundConstants zero;
    zero.kind = BoundKind::Bernstein;
    auto degenerate = bernstein_envelope(zero, 1, 2.0, 1.0, det);
    CHECK(degenerate.eval(0.5) == 0.0);  // noiseless: only I1 remains
}

TEST_CASE("semi-exponential envelope and its applicability guard") {
    BoundConstants bc;
    bc.kind = BoundKind::SemiExp;
    bc.V2 = 1.0;
    bc.delta = 1.0;
    bc.q = 0.5;
    auto env = semiexp_envelope(bc, 1, 2.0, 1.0, InitialTailSpec::deterministic());
    REQUIRE(env.has_value());
    // at x = 4 the displayed value 4 exp{-4/(2(1+2^{1.5}))} = 2.37 clamps to 1
    CHECK(4.0 * std::exp(-4.0 / (2.0 * (1.0 + std::pow(2.0, 1.5)))) > 1.0);
    CHECK(env->eval(4.0) == 1.0);
    double expect = 4.0 * std::exp(-100.0 / (2.0 * (1.0 + std::pow(10.0, 1.5))));
    CHECK(env->eval(20.0) == doctest::Approx(expect));
    CHECK(env->eval(0.0) == 1.0);

    bc.V2 = 0.25;  // V_n = 0.5 < 1
    CHECK(!semiexp_envelope(bc, 1, 2.0, 1.0, InitialTailSpec::deterministic()).has_value());
}

TEST_CASE("Fuk-Nagaev envelope") {
    BoundConstants bc;
    bc.kind = BoundKind::FukNagaev;
    bc.V2 = 1.0;
    bc.Hq = 1.0;
    bc.q = 2.0;
    auto env = fuk_nagaev_envelope(bc, 1, 2.0, 1.0, InitialTailSpec::deterministic());
    // the displayed value at x = 10 is 0.32 + 2 e^{-0.4230} = 1.63, clamped to 1
    CHECK(0.32 + 2.0 * std::exp(-100.0 / (32.0 * std::exp(2.0))) > 1.0);
    CHECK(env.eval(10.0) == 1.0);
    double expect = 32.0 / 900.0 + 2.0 * std::exp(-900.0 / (32.0 * std::exp(2.0)));
    CHECK(env.eval(30.0) == doctest::Approx(expect));
    CHECK(env.eval(1e9) == doctest::Approx(0.0));

    BoundConstants bc0;
    bc0.kind = BoundKind::FukNagaev;
    bc0.q = 2.0;
    auto env0 = fuk_nagaev_envelope(bc0, 1, 2.0, 1.0, InitialTailSpec::deterministic());
    CHECK(env0.eval(1.0) == 0.0);
}

TEST_CASE("von Bahr-Esseen and weak-moment envelopes") {
    BoundConstants bc;
    bc.kind = BoundKind::VBE;
    bc.Vq = 1.0;
    bc.q = 2.0;
    auto env = vbe_envelope(bc, 1, 2.0, 1.0, InitialTailSpec::deterministic());
    CHECK(env.eval(4.0) == doctest::Approx(0.25));
    CHECK(env.eval(1e12) == doctest::Approx(0.0));

    BoundConstants wk;
    wk.kind = BoundKind::WeakMoment;
    wk.Bq = 1.0;
    wk.q = 1.5;
    auto wenv = weak_envelope(wk, 1, 2.0, 1.0, InitialTailSpec::deterministic());
    CHECK(wenv.eval(100.0) == doctest::Approx(std::pow(2.0, 3.5) * 7.0 / 1000.0));
    double prev = 2.0;
    for (double u = 0.1; u < 1000.0; u *= 1.3) {
        CHECK(wenv.eval(u) <= prev + 1e-15);
        prev = wenv.eval(u);
    }
}

TEST_CASE("McDiarmid envelope forms, range cutoff, and ordering") {
    BoundConstants bc;
    bc.kind = BoundKind::McDiarmid;
    bc.D = 2.0;
    bc.V2 = 4.0;
    auto det = InitialTailSpec::deterministic();
    auto rio = mcdiarmid_envelope(bc, 1, 2.0, 1.0, det, McDiarmidForm::Rio);
    auto prod = mcdiarmid_envelope(bc, 1, 2.0, 1.0, det, McDiarmidForm::Product);
    auto gauss = mcdiarmid_envelope(bc, 1, 2.0, 1.0, det, McDiarmidForm::Gaussian);

    CHECK(gauss.eval(2.0) == doctest::Approx(1.0));  // 2 e^{-0.5} clamps to 1
    CHECK(rio.eval(2.0 * bc.D) == 0.0);              // martingale range exhausted
    CHECK(rio.eval(5.0) == 0.0);
    for (double u = 0.05; u < 2.0 * bc.D; u += 0.05) {
        CHECK(rio.eval(u) <= prod.eval(u) + 1e-12);
        CHECK(prod.eval(u) <= gauss.eval(u) + 1e-12);
    }
    CHECK_THROWS(mcdiarmid_envelope(bc, 1, 2.0, 1.0, InitialTailSpec::exp_tail(1.0)));
}

TEST_CASE("two-parameter Hoeffding function and its relaxations") {
    CHECK(hoeffding_H(0.0, 1.3, 25.0) == doctest::Approx(1.0));
    double n = 25.0, v = 1.3;
    double v2 = v * v;
    double expect = std::pow(v2 / (n + v2), (n + v2) * n / (n + v2));
    CHECK(hoeffding_H(n, v, n) == doctest::Approx(expect));  // (+inf)^0 = 1 convention
    CHECK(hoeffding_H(n + 0.5, v, n) == 0.0);
    for (double x = 0.2; x < 20.0; x += 0.8)
        for (double w = 0.3; w < 8.0; w += 0.7) {
            CHECK(hoeffding_H(x, w, n) <= bennett_B(x, w) * (1.0 + 1e-12));
            CHECK(bennett_B(x, w) <= bernstein_B1(x, w) * (1.0 + 1e-12));
        }
}

TEST_CASE("Hoeffding envelope: bounded case needs T, unbounded needs a tail functional") {
    BoundConstants bc;
    bc.kind = BoundKind::Hoeffding;
    bc.V2 = 2.0;
    bc.delta = 1.0;
    bc.T = 1.0;
    auto det = InitialTailSpec::deterministic();
    auto env = hoeffding_envelope(bc, 1, 2.0, 1.0, det, 12);
    CHECK(env.eval(0.0) == 1.0);
    CHECK(env.eval(1.0) <= 1.0);

    bc.T = 0.0;
    CHECK_THROWS(hoeffding_envelope(bc, 1, 2.0, 1.0, det, 12));
    auto genv = hoeffding_envelope(bc, 1, 2.0, 1.0, det, 12, 0.0,
                                   [](double y) { return std::exp(-y); });
    CHECK(genv.eval(3.0) <= 1.0);
    CHECK(genv.eval(3.0) >= 0.0);
}

TEST_CASE("threshold convention: eval works on u = d^{1/p} x") {
    BoundConstants bc;
    bc.kind = BoundKind::VBE;
    bc.Vq = 1.0;
    bc.q = 2.0;
    auto env = vbe_envelope(bc, 4, 2.0, 1.0, InitialTailSpec::deterministic());
    // x = u / d^{1/2} = u/2; bound = 2^q d Vq / x^q = 16/(u/2)^2
    CHECK(env.eval(16.0) == doctest::Approx(16.0 / 64.0));
}

TEST_CASE("every envelope is clamped and nonincreasing on a grid") {
    auto det = InitialTailSpec::deterministic();
    std::vector<BoundEnvelope> envs;
    BoundConstants b1;
    b1.kind = BoundKind::Bernstein;
    b1.V2 = 3.0;
    b1.delta = 0.7;
    envs.push_back(bernstein_envelope(b1, 2, 2.0, 1.5, det));
    BoundConstants b2;
    b2.kind = BoundKind::FukNagaev;
    b2.V2 = 2.0;
    b2.Hq = 5.0;
    b2.q = 3.0;
    envs.push_back(fuk_nagaev_envelope(b2, 2, 1.0, 1.2, InitialTailSpec::exp_tail(0.5)));
    BoundConstants b3;
    b3.kind = BoundKind::McDiarmid;
    b3.D = 4.0;
    b3.V2 = 6.0;
    envs.push_back(mcdiarmid_envelope(b3, 1, 2.0, 1.0, InitialTailSpec::bounded_diameter(0.5)));
    const long n = 20;
    for (const auto& env : envs) {
        double prev = 2.0;
        for (int i = 0; i < 1000; ++i) {
            double u = 3.0 * n * i / 999.0;
            double v = env.eval(u);
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            REQUIRE(v <= prev + 1e-12);
            prev = v;
        }
        CHECK(env.eval(0.0) == 1.0);
    }
}

#include "nhmc/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "nhmc/erm.hpp"
#include "nhmc/moments.hpp"
#include "nhmc/montecarlo.hpp"
#include "nhmc/sa.hpp"
#include "nhmc/suite.hpp"

namespace nhmc::selftest {

namespace {

using Verdict = std::pair<bool, std::string>;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Independent oracle: K_{k,n} by direct summation of the defining series with
// forward prefix products. Deliberately not the backward recurrence.
double direct_series_K(const Schedule& s, long k, long n) {
    double sum = 1.0, prod = 1.0;
    for (long j = k + 1; j <= n; ++j) {
        prod *= s.eval(j).rho;
        sum += prod;
    }
    return sum;
}

Schedule random_schedule(rng::Stream& gen, int which) {
    double u1 = gen.next_uniform(), u2 = gen.next_uniform(), u3 = gen.next_uniform();
    switch (which % 4) {
        case 0:
            return make_schedule(Regime::C15, 0.9 * u1, 0.05 + 0.9 * u2, 0.1 + 2.0 * u3);
        case 1:
            return make_schedule(Regime::C16, 0.05 + 0.9 * u1, 0.05 + 0.9 * u2, 0.1 + 2.0 * u3);
        case 2:
            return make_schedule(Regime::C17, 0.05 + 0.95 * u1, 0.05 + 0.9 * u2, 0.1 + 2.0 * u3);
        default: {
            CustomSequences seq;
            for (int i = 0; i < 49; ++i) {
                seq.rho.push_back(0.99 * gen.next_uniform());
                seq.tau.push_back(2.0 * gen.next_uniform());
                seq.xi.push_back(2.0 * gen.next_uniform());
            }
            return make_schedule(Regime::Custom, 0.0, 0.0, 0.0, seq);
        }
    }
}

Verdict criterion_coefficient_oracle() {
    rng::Stream gen(0xACCE5701ULL);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Schedule s = random_schedule(gen, trial);
        for (long n = 2; n <= 50; ++n) {
            auto K = compute_K(s, n);
            for (long k = 1; k <= n; ++k) {
                double direct = direct_series_K(s, k, n);
                double rel = std::fabs(K.at(k) - direct) / std::max(1.0, std::fabs(direct));
                worst = std::max(worst, rel);
            }
        }
    }
    return {worst <= 1e-12, "max relative error " + fmt(worst) + " over 100 schedules, n=2..50"};
}

ChainModel exact_check_model() {
    return make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.0, NoiseSpec::two_atom(1.0, -1.0, 0.5),
                          InitSpec::point(Vec{0.0}), 2.0);
}

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g(static_cast<std::size_t>(points));
    double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (points - 1));
    return g;
}

Verdict criterion_exact_domination(int threads) {
    ChainModel m = exact_check_model();
    auto f = FunctionalSpec::sum_of_states();
    const long n = 12;
    auto probe = enumerate_exact_tail(m, f, n, {}, threads);
    auto grid = log_grid(probe.x_grid.front(), probe.x_grid.back(), 50);
    auto tail = enumerate_exact_tail(m, f, n, grid, threads);

    std::vector<EnvelopeRequest> reqs = {
        {BoundKind::Bernstein, 0.0}, {BoundKind::FukNagaev, 2.0}, {BoundKind::FukNagaev, 4.0},
        {BoundKind::VBE, 1.5},       {BoundKind::VBE, 2.0},       {BoundKind::WeakMoment, 1.5},
        {BoundKind::McDiarmid, 0.0}, {BoundKind::Hoeffding, 0.0},
    };
    auto envs = build_envelope_suite(m, n, f.dim(m), reqs);
    long violations = 0;
    std::string failing;
    for (const auto& env : envs) {
        auto rep = check_domination(tail, env);
        violations += static_cast<long>(rep.violations.size());
        if (!rep.pass) failing += " " + rep.envelope_tag;
    }
    return {violations == 0, std::to_string(envs.size()) + " envelopes x 50 thresholds, " +
                                 std::to_string(violations) + " violations" +
                                 (failing.empty() ? "" : " in" + failing)};
}

Verdict criterion_mc_domination(int threads) {
    auto fu = FunctionalSpec::sum_of_states();
    const long n = 200, N = 20000;
    struct Case {
        std::string name;
        ChainModel model;
    };
    std::vector<Case> cases;
    cases.push_back({"C15", make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.25,
                                           NoiseSpec::gaussian(1.0), InitSpec::point(Vec{0.0}), 2.0)});
    cases.push_back({"C16", make_linear_sa_additive(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.25,
                                                    NoiseSpec::gaussian(1.0),
                                                    InitSpec::point(Vec{0.0}), 2.0)});
    cases.push_back({"C17", make_linear_sa_scaled_noise(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.75,
                                                        NoiseSpec::gaussian(1.0),
                                                        InitSpec::point(Vec{0.0}), 2.0)});
    std::vector<EnvelopeRequest> reqs = {
        {BoundKind::Bernstein, 0.0}, {BoundKind::SemiExp, 0.5},   {BoundKind::FukNagaev, 2.0},
        {BoundKind::FukNagaev, 4.0}, {BoundKind::VBE, 1.5},       {BoundKind::VBE, 2.0},
        {BoundKind::WeakMoment, 1.5}, {BoundKind::Hoeffding, 0.0},
    };
    long violations = 0;
    std::string detail;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& c = cases[ci];
        auto tail = estimate_tail(c.model, fu, n, N, {}, 0xACCE5703ULL + ci, threads);
        auto envs = build_envelope_suite(c.model, n, fu.dim(c.model), reqs);
        long v = 0;
        for (const auto& env : envs) v += static_cast<long>(check_domination(tail, env).violations.size());
        violations += v;
        detail += c.name + ":" + std::to_string(envs.size()) + " envelopes," +
                  std::to_string(v) + " violations ";
    }
    return {violations == 0, detail};
}

Verdict criterion_regime_ordering() {
    const long n = 1000;
    MomentConstants mc;
    mc.H1 = 1.0;
    mc.A1 = 1.0;
    auto env_for = [&](const Schedule& s) {
        auto K = compute_K(s, n);
        auto bc = constants_bernstein(K, s, mc);
        return bernstein_envelope(bc, 1, 2.0, K.at(1), InitialTailSpec::deterministic(),
                                  BernsteinForm::Refined, n);
    };
    auto e15 = env_for(make_schedule(Regime::C15, 0.25, 0.5, 1.0));
    auto e16 = env_for(make_schedule(Regime::C16, 0.25, 0.5, 1.0));
    auto e17 = env_for(make_schedule(Regime::C17, 0.75, 0.5, 1.0));
    long informative = 0, bad16 = 0, bad17 = 0;
    for (double x : log_grid(1e-2, 3.0 * n, 400)) {
        double v15 = e15.eval(x);
        if (v15 <= 1e-8 || v15 >= 0.9) continue;
        ++informative;
        if (e16.eval(x) < v15 * (1.0 - 1e-12)) ++bad16;
        if (e17.eval(x) > v15 * (1.0 + 1e-12)) ++bad17;
    }
    bool ok = informative >= 10 && bad16 == 0 && bad17 == 0;
    return {ok, std::to_string(informative) + " informative thresholds, C16>=C15 fails " +
                    std::to_string(bad16) + ", C17<=C15 fails " + std::to_string(bad17)};
}

Verdict criterion_lemma_asymptotics() {
    std::vector<long> grid = {100, 1000, 10000};
    auto ratio_of = [](const std::vector<double>& v) {
        double lo = v[0], hi = v[0];
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        return hi / lo;
    };
    auto rep15 = asymptotics_report(make_schedule(Regime::C15, 0.25, 0.5, 1.0), grid);
    auto rep16 = asymptotics_report(make_schedule(Regime::C16, 0.25, 0.5, 1.0), grid);
    auto rep17 = asymptotics_report(make_schedule(Regime::C17, 0.75, 0.5, 1.0), grid);
    auto column = [](const AsymptoticsReport& r, auto proj) {
        std::vector<double> v;
        for (const auto& row : r.rows) v.push_back(proj(row));
        return v;
    };
    double r15 = ratio_of(column(rep15, [](const AsymptoticsRow& r) { return r.max_K_tau_xi; }));
    double r16 = ratio_of(column(rep16, [](const AsymptoticsRow& r) { return r.max_K_tau_over_ka; }));
    double r17 = ratio_of(column(rep17, [](const AsymptoticsRow& r) { return r.max_K_tau_times_ka; }));
    double k15 = ratio_of(column(rep15, [](const AsymptoticsRow& r) { return r.K1n; }));
    double k16 = ratio_of(column(rep16, [](const AsymptoticsRow& r) { return r.K1n; }));
    double k17 = ratio_of(column(rep17, [](const AsymptoticsRow& r) { return r.K1n; }));
    bool ok = r15 < 1.10 && r16 <= 2.0 && r17 <= 2.0 && k15 <= 2.0 && k16 <= 2.0 && k17 <= 2.0 &&
              rep15.log_product_ok && rep16.log_product_ok;
    return {ok, "C15 spread " + fmt(r15) + ", C16 ratio " + fmt(r16) + ", C17 ratio " + fmt(r17) +
                    ", K1n ratios " + fmt(k15) + "/" + fmt(k16) + "/" + fmt(k17) +
                    ", log-product " + (rep15.log_product_ok && rep16.log_product_ok ? "ok" : "violated")};
}

Verdict criterion_moment_bounds(int threads) {
    auto f = FunctionalSpec::sum_of_states();
    const long n = 200, N = 10000;
    std::vector<ChainModel> models;
    models.push_back(make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.25, NoiseSpec::gaussian(1.0),
                                    InitSpec::point(Vec{0.0}), 2.0));
    models.push_back(make_linear_sa_additive(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.25,
                                             NoiseSpec::gaussian(1.0), InitSpec::point(Vec{0.0}),
                                             2.0));
    bool ok = true;
    std::string detail;
    int mi = 0;
    for (const auto& m : models) {
        auto K = compute_K(m.schedule, n);
        for (double q : {2.0, 4.0}) {
            auto mc = derive_constants(m, BoundKind::MZ, q);
            auto bc = constants_mz(K, m.schedule, mc, q);
            double bound = mz_moment_bound(bc.Tq, m.d, q);
            auto est = estimate_moment_norm(m, f, n, N, q, 0xACCE5706ULL + mi, threads);
            if (est.ucb_99 > bound) ok = false;
            detail += "mz q=" + fmt(q) + " ucb " + fmt(est.ucb_99) + " <= " + fmt(bound) + "; ";
        }
        for (double q : {1.0, 2.0}) {
            auto mc = derive_constants(m, BoundKind::VBEMoment, q);
            auto bc = constants_vbe_moment(K, m.schedule, mc, q);
            double bound = vbe_moment_bound(bc.Vq, m.d, q);
            auto est = estimate_moment_norm(m, f, n, N, q, 0xACCE5716ULL + mi, threads);
            if (est.ucb_99 > bound) ok = false;
            detail += "vbe q=" + fmt(q) + " ucb " + fmt(est.ucb_99) + " <= " + fmt(bound) + "; ";
        }
        ++mi;
    }
    return {ok, detail};
}

Verdict criterion_averaging(int threads) {
    rng::Stream gen(0xACCE5707ULL);
    double worst_gap = -1e300;
    for (int cfg = 0; cfg < 20; ++cfg) {
        double gamma = 0.2 + 0.75 * gen.next_uniform();
        double alpha = 0.6 * gen.next_uniform();
        double b = -2.0 + 4.0 * gen.next_uniform();
        double x1 = -3.0 + 6.0 * gen.next_uniform();
        auto m = make_linear_sa(Mat::scalar(1.0), Vec{b}, gamma, alpha, NoiseSpec::gaussian(1.0),
                                InitSpec::point(Vec{x1}), 2.0);
        Vec xs = solve_x_star(m);
        double ex1 = std::fabs(x1 - xs[0]);
        double c0 = bias_constant_C0(m, ex1);
        for (long n = 2; n <= 1000; ++n) {
            double err = exact_mean_average_error(m, n, xs);
            worst_gap = std::max(worst_gap, err - c0 / static_cast<double>(n));
        }
    }
    bool bias_ok = worst_gap <= 1e-12;

    auto m = make_linear_sa(Mat::scalar(1.0), Vec{1.0}, 0.5, 0.0, NoiseSpec::gaussian(1.0),
                            InitSpec::point(Vec{0.0}), 2.0);
    Vec xs = solve_x_star(m);
    std::vector<long> n_grid = {100, 200, 400, 800, 1600, 3200, 6400};
    auto suite = slope_experiment_all(m, xs, n_grid, 3000, 0xACCE5717ULL, threads);
    const auto& uni = suite.uniform;
    const auto& suf = suite.suffix;
    bool slope_ok = uni.slope >= -0.6 && uni.slope <= -0.4 && suf.slope >= -0.6 && suf.slope <= -0.4;
    return {bias_ok && slope_ok, "worst C0/n gap " + fmt(worst_gap) + ", uniform slope " +
                                     fmt(uni.slope) + ", suffix slope " + fmt(suf.slope)};
}

Verdict criterion_analytic_orderings() {
    bool ok = true;
    std::string what;
    for (int i = 1; i <= 100; ++i) {
        double x = static_cast<double>(i) / 101.0;
        double closed = (x * x - 2.0 * x) * std::log1p(-x);
        if (ell_star_numeric(x) < closed - 1e-9) {
            ok = false;
            what += " ell*(" + fmt(x) + ")";
        }
        if (closed < 2.0 * x * x - 1e-9) {
            ok = false;
            what += " closed(" + fmt(x) + ")";
        }
    }
    const double nn = 25.0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            double x = 0.25 + 19.75 * i / 19.0;
            double v = 0.25 + 9.75 * j / 19.0;
            double h = hoeffding_H(x, v, nn);
            double be = bennett_B(x, v);
            double b1 = bernstein_B1(x, v);
            if (h > be * (1.0 + 1e-12) || be > b1 * (1.0 + 1e-12)) {
                ok = false;
                what += " H(" + fmt(x) + "," + fmt(v) + ")";
            }
        }
    }
    return {ok, ok ? "ell* floor and H<=Bennett<=Bernstein hold on all grids" : "failures at" + what};
}

Verdict criterion_erm(int threads) {
    auto prob = make_erm_problem(0.2, 0.8, 0.5, 0.25, NoiseSpec::gaussian(1.0), 1.0);
    auto rep = excess_risk_experiment(prob, {250, 1000, 4000}, 8000, 20, 0xACCE5709ULL, threads);
    bool decreasing = rep.excess_median[0] > rep.excess_median[1] &&
                      rep.excess_median[1] > rep.excess_median[2];
    bool dominated = rep.domination_count >= 18;
    return {decreasing && dominated,
            "medians " + fmt(rep.excess_median[0]) + " > " + fmt(rep.excess_median[1]) + " > " +
                fmt(rep.excess_median[2]) + ", domination " + std::to_string(rep.domination_count) +
                "/20, surface SE ratio " + fmt(rep.pop_se_ratio)};
}

Verdict criterion_negative_control(int threads) {
    ChainModel m = exact_check_model();
    auto f = FunctionalSpec::sum_of_states();
    auto tail = enumerate_exact_tail(m, f, 12, {}, threads);
    auto fake = custom_envelope(
        [tail](double u) {
            for (std::size_t i = 0; i < tail.x_grid.size(); ++i)
                if (std::fabs(tail.x_grid[i] - u) < 1e-12) return 0.5 * tail.p_hat[i];
            return 0.0;
        },
        1, 2.0, 12, "half_exact_fake");
    auto rep = check_domination(tail, fake);
    bool ok = !rep.pass && !rep.violations.empty();
    return {ok, "fake envelope flagged " + std::to_string(rep.violations.size()) + " violations"};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(int threads, int only) {
    std::vector<CriterionResult> out;
    // stated runtime budgets in seconds; 0 = unbudgeted
    auto run = [&](int id, const std::string& name, double budget_s,
                   const std::function<Verdict()>& body) {
        if (only != 0 && only != id) return;
        CriterionResult r;
        r.id = id;
        r.name = name;
        auto t0 = std::chrono::steady_clock::now();
        try {
            auto [ok, detail] = body();
            r.pass = ok;
            r.detail = detail;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (budget_s > 0.0 && r.runtime_s > budget_s) {
            r.pass = false;
            r.detail += " [over " + std::to_string(budget_s) + "s budget]";
        }
        out.push_back(std::move(r));
    };
    run(1, "coefficient-oracle-equivalence", 1.0, [&] { return criterion_coefficient_oracle(); });
    run(2, "exact-domination", 5.0, [&] { return criterion_exact_domination(threads); });
    run(3, "mc-domination", 60.0, [&] { return criterion_mc_domination(threads); });
    run(4, "regime-ordering", 0.0, [&] { return criterion_regime_ordering(); });
    run(5, "lemma-asymptotics", 5.0, [&] { return criterion_lemma_asymptotics(); });
    run(6, "moment-bounds", 30.0, [&] { return criterion_moment_bounds(threads); });
    run(7, "averaging", 90.0, [&] { return criterion_averaging(threads); });
    run(8, "analytic-orderings", 0.0, [&] { return criterion_analytic_orderings(); });
    run(9, "erm-excess-risk", 180.0, [&] { return criterion_erm(threads); });
    run(10, "negative-control", 0.0, [&] { return criterion_negative_control(threads); });
    return out;
}

}  // namespace nhmc::selftest

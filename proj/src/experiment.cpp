#include "nhmc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nhmc/erm.hpp"
#include "nhmc/moments.hpp"
#include "nhmc/montecarlo.hpp"
#include "nhmc/sa.hpp"
#include "nhmc/suite.hpp"

namespace nhmc {

namespace {

using nlohmann::json;

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[40];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& cols) : f_(path) {
        if (!f_) throw std::runtime_error("cannot open output file " + path);
        f_ << "# generated " << timestamp() << "\n";
        for (std::size_t i = 0; i < cols.size(); ++i) f_ << (i ? "," : "") << cols[i];
        f_ << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
        f_ << "\n";
    }

private:
    std::ofstream f_;
};

struct Verdicts {
    json list = json::array();
    bool all_pass = true;
    void add(const std::string& name, bool pass, const std::string& detail = "") {
        json v;
        v["name"] = name;
        v["pass"] = pass;
        if (!detail.empty()) v["detail"] = detail;
        list.push_back(v);
        if (!pass) all_pass = false;
    }
};

NoiseSpec noise_from_config(const Config& cfg, const std::string& section) {
    std::string kind = cfg.get_str_or(section, "noise", "gaussian");
    int d = static_cast<int>(cfg.get_long_or(section, "d", 1));
    if (kind == "gaussian")
        return NoiseSpec::gaussian(cfg.get_double_or(section, "sigma", 1.0), d);
    if (kind == "uniform_pm1") return NoiseSpec::uniform_pm1(d);
    if (kind == "two_atom")
        return NoiseSpec::two_atom(cfg.get_double_or(section, "atom_a", 1.0),
                                   cfg.get_double_or(section, "atom_b", -1.0),
                                   cfg.get_double_or(section, "atom_pr", 0.5));
    if (kind == "bounded_uniform")
        return NoiseSpec::bounded_uniform(cfg.get_double_or(section, "lo", -1.0),
                                          cfg.get_double_or(section, "hi", 1.0), d);
    throw std::invalid_argument("config: unknown noise kind '" + kind + "'");
}

Mat mat_from_values(const std::vector<double>& vals) {
    Mat a(static_cast<int>(vals.size()));
    for (int i = 0; i < a.n; ++i) a.at(i, i) = vals[static_cast<std::size_t>(i)];
    return a;
}

Vec vec_from_config(const Config& cfg, const std::string& key, int d, double fallback) {
    if (!cfg.has("model", key)) return Vec(static_cast<std::size_t>(d), fallback);
    auto vals = cfg.get_list("model", key);
    if (vals.size() == 1 && d > 1) return Vec(static_cast<std::size_t>(d), vals[0]);
    check(static_cast<int>(vals.size()) == d, "config: " + key + " has wrong dimension");
    return vals;
}

double p_from_config(const Config& cfg, const std::string& section) {
    std::string p = cfg.get_str_or(section, "p", "2");
    if (p == "inf" || p == "infinity") return kInfP;
    return std::stod(p);
}

}  // namespace

ChainModel model_from_config(const Config& cfg) {
    std::string example = cfg.get_str("model", "example");
    int d = static_cast<int>(cfg.get_long_or("model", "d", 1));
    double p = p_from_config(cfg, "model");
    NoiseSpec noise = noise_from_config(cfg, "model");
    InitSpec init = InitSpec::point(vec_from_config(cfg, "x1", d, 0.0));
    double gamma = cfg.get_double_or("model", "gamma", 0.5);
    double alpha = cfg.get_double_or("model", "alpha", 0.0);

    if (example == "linear_sa" || example == "projected_linear_sa" ||
        example == "linear_sa_scaled_noise" || example == "linear_sa_additive") {
        Mat A = mat_from_values(vec_from_config(cfg, "a", d, 1.0));
        Vec B = vec_from_config(cfg, "b", d, 0.0);
        if (example == "linear_sa") return make_linear_sa(A, B, gamma, alpha, noise, init, p);
        if (example == "projected_linear_sa")
            return make_projected_linear_sa(A, B, gamma, alpha, cfg.get_double("model", "d_proj"),
                                            noise, init);
        if (example == "linear_sa_scaled_noise")
            return make_linear_sa_scaled_noise(A, B, gamma, alpha, noise, init, p);
        return make_linear_sa_additive(A, B, gamma, alpha, noise, init, p);
    }
    if (example == "functional_ar") {
        Mat R = mat_from_values(vec_from_config(cfg, "r", d, 0.5));
        Vec g0 = vec_from_config(cfg, "g0", d, 0.0);
        return make_functional_ar(R, g0, noise, init, p);
    }
    if (example == "unit_root")
        return make_unit_root(cfg.get_double("model", "c"), alpha,
                              cfg.get_bool_or("model", "reciprocal", false), noise, init);
    if (example == "projected_sgd") {
        auto weights = cfg.get_list("model", "weights");
        double radius = cfg.get_double_or("model", "center_radius", 1.0);
        std::vector<QuadraticTerm> terms;
        rng::Stream gen(rng::hash64(0x5D6D, weights.size()));
        for (double w : weights) {
            Vec c(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] =
                radius * (2.0 * gen.next_uniform() - 1.0);
            terms.push_back({w, c});
        }
        std::optional<NoiseSpec> eta;
        if (cfg.has("model", "sgld_sigma"))
            eta = NoiseSpec::gaussian(cfg.get_double("model", "sgld_sigma"), d);
        return make_projected_sgd(terms, static_cast<int>(cfg.get_long_or("model", "minibatch", 1)),
                                  cfg.get_double("model", "d_proj"), gamma, alpha, eta, init);
    }
    if (example == "subsampled") {
        Mat R = mat_from_values(vec_from_config(cfg, "r", d, 0.5));
        Vec g0 = vec_from_config(cfg, "g0", d, 0.0);
        auto inner = make_functional_ar(R, g0, noise, init, p);
        auto gapsd = cfg.get_list("model", "gaps");
        std::vector<long> gaps(gapsd.begin(), gapsd.end());
        return make_subsampled(std::move(inner), gaps);
    }
    throw std::invalid_argument("config: unknown model example '" + example + "'");
}

Schedule schedule_from_config(const Config& cfg) {
    if (!cfg.has("schedule", "regime")) return model_from_config(cfg).schedule;
    std::string regime = cfg.get_str("schedule", "regime");
    double alpha = cfg.get_double_or("schedule", "alpha", 0.0);
    double rho = cfg.get_double_or("schedule", "rho", 0.5);
    double eta = cfg.get_double_or("schedule", "eta", 1.0);
    std::optional<CustomSequences> custom;
    if (cfg.has("schedule", "rho_seq")) {
        CustomSequences seq;
        seq.rho = cfg.get_list("schedule", "rho_seq");
        seq.tau = cfg.get_list("schedule", "tau_seq");
        seq.xi = cfg.get_list("schedule", "xi_seq");
        custom = std::move(seq);
    }
    Regime r;
    if (regime == "c15" || regime == "C15")
        r = Regime::C15;
    else if (regime == "c16" || regime == "C16")
        r = Regime::C16;
    else if (regime == "c17" || regime == "C17")
        r = Regime::C17;
    else if (regime == "custom")
        r = Regime::Custom;
    else
        throw std::invalid_argument("config: unknown regime '" + regime + "'");
    return make_schedule(r, alpha, rho, eta, std::move(custom));
}

namespace {

std::vector<EnvelopeRequest> requests_from_config(const Config& cfg) {
    std::vector<EnvelopeRequest> reqs;
    std::vector<std::string> kinds =
        cfg.has("bounds", "kinds") ? cfg.get_str_list("bounds", "kinds")
                                   : std::vector<std::string>{"bernstein"};
    auto qs_for = [&](const std::string& key, std::vector<double> fallback) {
        return cfg.has("bounds", key) ? cfg.get_list("bounds", key) : fallback;
    };
    for (const auto& k : kinds) {
        if (k == "bernstein")
            reqs.push_back({BoundKind::Bernstein, 0.0});
        else if (k == "semiexp")
            for (double q : qs_for("semiexp_q", {0.5})) reqs.push_back({BoundKind::SemiExp, q});
        else if (k == "fuk_nagaev")
            for (double q : qs_for("fuk_nagaev_q", {2.0})) reqs.push_back({BoundKind::FukNagaev, q});
        else if (k == "vbe")
            for (double q : qs_for("vbe_q", {2.0})) reqs.push_back({BoundKind::VBE, q});
        else if (k == "weak")
            for (double q : qs_for("weak_q", {1.5})) reqs.push_back({BoundKind::WeakMoment, q});
        else if (k == "mcdiarmid")
            reqs.push_back({BoundKind::McDiarmid, 0.0});
        else if (k == "hoeffding")
            reqs.push_back({BoundKind::Hoeffding, 0.0});
        else
            throw std::invalid_argument("config: unknown bound kind '" + k + "'");
    }
    return reqs;
}

MomentConstants constants_from_config(const Config& cfg, const ChainModel& m, BoundKind kind,
                                      double q) {
    if (cfg.get_str_or("constants", "source", "derived") == "derived")
        return derive_constants(m, kind, q);
    MomentConstants mc;
    mc.q = q;
    mc.H1 = cfg.get_double_or("constants", "h1", 0.0);
    mc.A1 = cfg.get_double_or("constants", "a1", 0.0);
    mc.A1_semi = cfg.get_double_or("constants", "a1_semi", 0.0);
    mc.Eexp_q = cfg.get_double_or("constants", "eexp_q", 0.0);
    mc.A1_fn = cfg.get_double_or("constants", "a1_fn", 0.0);
    mc.B1q = cfg.get_double_or("constants", "b1q", 0.0);
    mc.A1q = cfg.get_double_or("constants", "a1q", 0.0);
    mc.B1q_init = cfg.get_double_or("constants", "b1q_init", 0.0);
    mc.A1q_init = cfg.get_double_or("constants", "a1q_init", 0.0);
    mc.T1 = cfg.get_double_or("constants", "t1", 0.0);
    mc.T = cfg.get_double_or("constants", "t", 0.0);
    mc.init_tail = m.init.deterministic ? InitialTailSpec::deterministic() : m.init.tail;
    mc.init_moment_known = m.init.deterministic;
    return mc;
}

int cmd_coeffs(const Config& cfg, const RunOptions& opts, Verdicts& verdicts) {
    Schedule s = schedule_from_config(cfg);
    long n = cfg.get_long_or("run", "n", 100);
    auto K = compute_K(s, n);
    CsvWriter csv(opts.out_dir + "/coeffs.csv", {"k", "K_kn", "tau_k", "xi_k", "rho_k"});
    for (long k = 1; k <= n; ++k) {
        if (k == 1) {
            csv.row({std::to_string(k), fmt_num(K.at(k)), "", "", ""});
        } else {
            auto t = s.eval(k);
            csv.row({std::to_string(k), fmt_num(K.at(k)), fmt_num(t.tau), fmt_num(t.xi),
                     fmt_num(t.rho)});
        }
    }
    if (s.regime() != Regime::Custom) {
        std::vector<long> grid;
        if (cfg.has("run", "n_grid"))
            for (double v : cfg.get_list("run", "n_grid")) grid.push_back(static_cast<long>(v));
        else
            grid = {n};
        auto rep = asymptotics_report(s, grid);
        CsvWriter acsv(opts.out_dir + "/asymptotics.csv",
                       {"n", "max_K_tau_xi", "max_K_tau_over_ka", "max_K_tau_times_ka", "K1n"});
        for (const auto& row : rep.rows)
            acsv.row({std::to_string(row.n), fmt_num(row.max_K_tau_xi),
                      fmt_num(row.max_K_tau_over_ka), fmt_num(row.max_K_tau_times_ka),
                      fmt_num(row.K1n)});
        verdicts.add("log_product_estimate", rep.log_product_ok);
    }
    verdicts.add("coefficients_written", true);
    return 0;
}

int cmd_bound(const Config& cfg, const RunOptions& opts, Verdicts& verdicts) {
    ChainModel m = model_from_config(cfg);
    long n = cfg.get_long_or("run", "n", 100);
    auto reqs = requests_from_config(cfg);
    auto envs = build_envelope_suite(m, n, m.d, reqs, [&](BoundKind k, double q) {
        return constants_from_config(cfg, m, k, q);
    });
    double umax = cfg.get_double_or("run", "u_max", 3.0 * static_cast<double>(n));
    double umin = cfg.get_double_or("run", "u_min", umax * 1e-3);
    long points = cfg.get_long_or("run", "u_points", 100);
    CsvWriter csv(opts.out_dir + "/bounds.csv",
                  {"u", "x", "bound_total", "bound_i1", "bound_martingale", "form_tag"});
    for (const auto& env : envs) {
        for (long i = 0; i < points; ++i) {
            double u = std::exp(std::log(umin) +
                                (std::log(umax) - std::log(umin)) * i / (points - 1));
            auto v = env.eval_detail(u);
            csv.row({fmt_num(u), fmt_num(u / d_to_inv_p(env.d(), env.p())), fmt_num(v.total),
                     fmt_num(v.i1), fmt_num(v.martingale), env.tag()});
        }
        verdicts.add("bound_" + env.tag(), true);
    }
    return 0;
}

int cmd_verify(const Config& cfg, const RunOptions& opts, Verdicts& verdicts) {
    ChainModel m = model_from_config(cfg);
    long n = cfg.get_long_or("run", "n", 200);
    long N = cfg.get_long_or("run", "replications", 20000);
    std::uint64_t seed = opts.seed_override.value_or(cfg.get_u64_or("run", "master_seed", 1));
    std::string mode = cfg.get_str_or("run", "mode", "mc");
    auto f = FunctionalSpec::sum_of_states();
    std::vector<double> grid;
    if (cfg.has("run", "u_grid")) grid = cfg.get_list("run", "u_grid");

    TailEstimate tail = mode == "exact"
                            ? enumerate_exact_tail(m, f, n, grid, opts.threads)
                            : estimate_tail(m, f, n, N, grid, seed, opts.threads);

    if (cfg.get_bool_or("run", "dump_trajectory", false)) {
        std::vector<std::string> tcols = {"step"};
        for (int i = 1; i <= m.d; ++i) tcols.push_back("x_" + std::to_string(i));
        CsvWriter tcsv(opts.out_dir + "/trajectory.csv", tcols);
        auto traj = simulate(m, n, seed);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            std::vector<std::string> cells = {std::to_string(k + 1)};
            for (double v : traj[k]) cells.push_back(fmt_num(v));
            tcsv.row(cells);
        }
    }

    auto reqs = requests_from_config(cfg);
    auto envs = build_envelope_suite(m, n, f.dim(m), reqs, [&](BoundKind k, double q) {
        return constants_from_config(cfg, m, k, q);
    });
    std::string fixture = cfg.get_str_or("run", "fixture", "none");
    if (fixture == "half_exact") {
        check(tail.exact, "verify: the half_exact fixture needs mode = exact");
        TailEstimate snapshot = tail;
        envs.push_back(custom_envelope(
            [snapshot](double u) {
                for (std::size_t i = 0; i < snapshot.x_grid.size(); ++i)
                    if (std::fabs(snapshot.x_grid[i] - u) < 1e-12) return 0.5 * snapshot.p_hat[i];
                return 0.0;
            },
            f.dim(m), m.p, n, "half_exact_fake"));
    } else {
        check(fixture == "none", "verify: unknown fixture '" + fixture + "'");
    }

    std::vector<std::string> cols = {"u", "p_hat", "p_lcb", "p_ucb"};
    std::vector<DominationReport> reports;
    for (const auto& env : envs) {
        reports.push_back(check_domination(tail, env));
        cols.push_back("bound_" + env.tag());
    }
    CsvWriter csv(opts.out_dir + "/verify.csv", cols);
    for (std::size_t i = 0; i < tail.x_grid.size(); ++i) {
        std::vector<std::string> cells = {fmt_num(tail.x_grid[i]), fmt_num(tail.p_hat[i]),
                                          fmt_num(tail.p_lcb_99[i]), fmt_num(tail.p_ucb_99[i])};
        for (const auto& rep : reports) cells.push_back(fmt_num(rep.bounds[i]));
        csv.row(cells);
    }
    for (const auto& rep : reports)
        verdicts.add("domination_" + rep.envelope_tag, rep.pass,
                     std::to_string(rep.violations.size()) + " violations, min margin " +
                         fmt_num(rep.min_margin));
    return 0;
}

int cmd_moments(const Config& cfg, const RunOptions& opts, Verdicts& verdicts) {
    ChainModel m = model_from_config(cfg);
    long n = cfg.get_long_or("run", "n", 200);
    long N = cfg.get_long_or("run", "replications", 10000);
    std::uint64_t seed = opts.seed_override.value_or(cfg.get_u64_or("run", "master_seed", 1));
    auto f = FunctionalSpec::sum_of_states();
    auto K = compute_K(m.schedule, n);
    CsvWriter csv(opts.out_dir + "/moments.csv", {"kind", "q", "bound", "mc_estimate", "mc_ucb"});
    std::vector<double> mzq = cfg.has("bounds", "mz_q") ? cfg.get_list("bounds", "mz_q")
                                                        : std::vector<double>{2.0, 4.0};
    std::vector<double> vbeq = cfg.has("bounds", "vbe_moment_q")
                                   ? cfg.get_list("bounds", "vbe_moment_q")
                                   : std::vector<double>{1.0, 2.0};
    int salt = 0;
    for (double q : mzq) {
        auto mc = constants_from_config(cfg, m, BoundKind::MZ, q);
        double bound = mz_moment_bound(constants_mz(K, m.schedule, mc, q).Tq, m.d, q);
        auto est = estimate_moment_norm(m, f, n, N, q, seed + salt++, opts.threads);
        csv.row({"mz", fmt_num(q), fmt_num(bound), fmt_num(est.estimate), fmt_num(est.ucb_99)});
        verdicts.add("mz_q" + fmt_num(q), est.ucb_99 <= bound);
    }
    for (double q : vbeq) {
        auto mc = constants_from_config(cfg, m, BoundKind::VBEMoment, q);
        double bound = vbe_moment_bound(constants_vbe_moment(K, m.schedule, mc, q).Vq, m.d, q);
        auto est = estimate_moment_norm(m, f, n, N, q, seed + salt++, opts.threads);
        csv.row({"vbe", fmt_num(q), fmt_num(bound), fmt_num(est.estimate), fmt_num(est.ucb_99)});
        verdicts.add("vbe_q" + fmt_num(q), est.ucb_99 <= bound);
    }
    return 0;
}

int cmd_sa(const Config& cfg, const RunOptions& opts, Verdicts& verdicts) {
    ChainModel m = model_from_config(cfg);
    long N = cfg.get_long_or("run", "replications", 2000);
    std::uint64_t seed = opts.seed_override.value_or(cfg.get_u64_or("run", "master_seed", 1));
    std::vector<long> n_grid = {100, 200, 400, 800, 1600, 3200, 6400};
    if (cfg.has("run", "n_grid")) {
        n_grid.clear();
        for (double v : cfg.get_list("run", "n_grid")) n_grid.push_back(static_cast<long>(v));
    }
    Vec xs = solve_x_star(m);
    double ex1 = 0.0;
    {
        Vec e = m.init.deterministic ? m.init.x1 : m.init.dist.mean();
        for (std::size_t i = 0; i < e.size(); ++i) e[i] -= xs[i];
        ex1 = lp_norm(e, m.p);
    }
    double c0 = bias_constant_C0(m, ex1);
    CsvWriter csv(opts.out_dir + "/sa.csv",
                  {"n", "err_final", "err_uniform", "err_suffix", "bias_bound", "C0_over_n"});
    auto suite = slope_experiment_all(m, xs, n_grid, N, seed, opts.threads);
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        long n = n_grid[i];
        csv.row({std::to_string(n), fmt_num(suite.final_iterate.points[i].mean_err),
                 fmt_num(suite.uniform.points[i].mean_err),
                 fmt_num(suite.suffix.points[i].mean_err), fmt_num(mean_bias_bound(m, n, ex1)),
                 fmt_num(c0 / static_cast<double>(n))});
    }
    verdicts.add("uniform_slope_in_window",
                 suite.uniform.slope >= -0.6 && suite.uniform.slope <= -0.4,
                 "slope " + fmt_num(suite.uniform.slope));
    verdicts.add("suffix_slope_in_window",
                 suite.suffix.slope >= -0.6 && suite.suffix.slope <= -0.4,
                 "slope " + fmt_num(suite.suffix.slope));
    return 0;
}

int cmd_erm(const Config& cfg, const RunOptions& opts, Verdicts& verdicts) {
    auto prob = make_erm_problem(cfg.get_double_or("erm", "theta_lo", 0.2),
                                 cfg.get_double_or("erm", "theta_hi", 0.8),
                                 cfg.get_double_or("erm", "theta0", 0.5),
                                 cfg.get_double_or("erm", "alpha", 0.25),
                                 noise_from_config(cfg, "erm"),
                                 cfg.get_double_or("erm", "x1", 1.0));
    std::vector<long> n_grid = {250, 1000, 4000};
    if (cfg.has("run", "n_grid")) {
        n_grid.clear();
        for (double v : cfg.get_list("run", "n_grid")) n_grid.push_back(static_cast<long>(v));
    }
    long reps = cfg.get_long_or("run", "repetitions", 20);
    long npop = cfg.get_long_or("run", "replications", 1000);
    std::uint64_t seed = opts.seed_override.value_or(cfg.get_u64_or("run", "master_seed", 1));
    auto rep = excess_risk_experiment(prob, n_grid, npop, reps, seed, opts.threads);
    CsvWriter csv(opts.out_dir + "/erm.csv",
                  {"n", "excess_median", "excess_q10", "excess_q90", "fitted_envelope"});
    for (std::size_t i = 0; i < n_grid.size(); ++i)
        csv.row({std::to_string(n_grid[i]), fmt_num(rep.excess_median[i]), fmt_num(rep.excess_q10[i]),
                 fmt_num(rep.excess_q90[i]), fmt_num(rep.fitted_envelope[i])});
    bool decreasing = true;
    for (std::size_t i = 1; i < rep.excess_median.size(); ++i)
        if (rep.excess_median[i] >= rep.excess_median[i - 1]) decreasing = false;
    long need = (9 * reps + 9) / 10;
    verdicts.add("excess_median_decreasing", decreasing);
    verdicts.add("fitted_envelope_domination", rep.domination_count >= need,
                 std::to_string(rep.domination_count) + "/" + std::to_string(reps));
    return 0;
}

}  // namespace

int run_experiment(const Config& cfg, const RunOptions& opts) {
    std::filesystem::create_directories(opts.out_dir);
    Verdicts verdicts;
    auto t0 = std::chrono::steady_clock::now();
    const std::string& sub = opts.subcommand;
    if (sub == "coeffs")
        cmd_coeffs(cfg, opts, verdicts);
    else if (sub == "bound")
        cmd_bound(cfg, opts, verdicts);
    else if (sub == "verify")
        cmd_verify(cfg, opts, verdicts);
    else if (sub == "moments")
        cmd_moments(cfg, opts, verdicts);
    else if (sub == "sa")
        cmd_sa(cfg, opts, verdicts);
    else if (sub == "erm")
        cmd_erm(cfg, opts, verdicts);
    else
        throw std::invalid_argument("unknown subcommand '" + sub + "'");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json summary;
    summary["subcommand"] = sub;
    summary["verdicts"] = verdicts.list;
    summary["timings"] = {{"total_s", secs}, {"generated", timestamp()}};
    std::ofstream out(opts.out_dir + "/summary.json");
    out << summary.dump(2) << "\n";
    return verdicts.all_pass ? 0 : 1;
}

}  // namespace nhmc

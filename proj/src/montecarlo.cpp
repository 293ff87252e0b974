#include "nhmc/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "nhmc/parallel.hpp"
#include "nhmc/stats.hpp"

namespace nhmc {

// ----------------------------------------------------------- FunctionalSpec

FunctionalSpec FunctionalSpec::sum_of_states() {
    FunctionalSpec f;
    f.kind = Kind::SumOfStates;
    return f;
}

FunctionalSpec FunctionalSpec::sum_of_norms() {
    FunctionalSpec f;
    f.kind = Kind::SumOfNorms;
    return f;
}

FunctionalSpec FunctionalSpec::custom(std::function<Vec(const std::vector<Vec>&)> fn, int out_dim,
                                      double lipschitz) {
    check(static_cast<bool>(fn), "FunctionalSpec: callable required");
    check(lipschitz > 0.0 && lipschitz <= 1.0,
          "FunctionalSpec: per-argument Lipschitz certificate must lie in (0,1]");
    FunctionalSpec f;
    f.kind = Kind::Custom;
    f.fn = std::move(fn);
    f.custom_dim = out_dim;
    f.lipschitz = lipschitz;
    return f;
}

int FunctionalSpec::dim(const ChainModel& m) const {
    switch (kind) {
        case Kind::SumOfStates: return m.d;
        case Kind::SumOfNorms: return 1;
        case Kind::Custom: return custom_dim;
    }
    return 1;
}

Vec FunctionalSpec::eval(const ChainModel& m, const std::vector<Vec>& traj) const {
    switch (kind) {
        case Kind::SumOfStates: {
            Vec s(m.d, 0.0);
            for (const Vec& x : traj)
                for (int i = 0; i < m.d; ++i) s[i] += x[i];
            return s;
        }
        case Kind::SumOfNorms: {
            double s = 0.0;
            for (const Vec& x : traj) s += lp_norm(x, m.p);
            return Vec{s};
        }
        case Kind::Custom:
            return fn(traj);
    }
    return {};
}

std::string FunctionalSpec::name() const {
    switch (kind) {
        case Kind::SumOfStates: return "sum_of_states";
        case Kind::SumOfNorms: return "sum_of_norms";
        case Kind::Custom: return "custom";
    }
    return "?";
}

// ----------------------------------------------------------------- kernels

namespace {

std::uint64_t derived_pilot_seed(std::uint64_t seed) {
    std::uint64_t p = rng::hash64(seed, 0x9117070ULL);
    return p == seed ? p + 1 : p;
}

TailEstimate assemble_tail(const ChainModel& m, const FunctionalSpec& f,
                           const std::vector<double>& norms, std::vector<double> x_grid, long n,
                           long N, double bias) {
    TailEstimate t;
    std::sort(x_grid.begin(), x_grid.end());
    t.x_grid = x_grid.empty() ? default_x_grid(norms) : std::move(x_grid);
    t.N = N;
    t.n = n;
    t.d = f.dim(m);
    t.p = m.p;
    t.model_tag = m.tag;
    t.center_bias = bias;
    for (double u : t.x_grid) {
        long c = 0, c_hi = 0, c_lo = 0;
        for (double v : norms) {
            if (v >= u) ++c;
            if (v >= u + bias) ++c_hi;  // conservative for the lower band
            if (v >= std::max(u - bias, 0.0)) ++c_lo;
        }
        t.counts.push_back(c);
        t.p_hat.push_back(static_cast<double>(c) / static_cast<double>(N));
        t.p_lcb_99.push_back(stats::clopper_pearson_lower(c_hi, N, 0.99));
        t.p_ucb_99.push_back(stats::clopper_pearson_upper(c_lo, N, 0.99));
    }
    return t;
}

}  // namespace

Centering compute_centering(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                            std::uint64_t seed, std::uint64_t pilot_seed) {
    Centering c;
    if (f.kind == FunctionalSpec::Kind::SumOfStates) {
        if (auto means = exact_mean_trajectory(m, n)) {
            c.value.assign(static_cast<std::size_t>(m.d), 0.0);
            for (const Vec& x : *means)
                for (int i = 0; i < m.d; ++i) c.value[static_cast<std::size_t>(i)] += x[i];
            c.exact = true;
            return c;
        }
    }
    if (pilot_seed == 0) pilot_seed = derived_pilot_seed(seed);
    check(pilot_seed != seed, "estimate_tail: pilot and main runs must not share a seed");
    long pn = 10 * N;
    int d = f.dim(m);
    std::vector<Vec> vals(static_cast<std::size_t>(pn));
    parallel_for(static_cast<std::size_t>(pn), 0, [&](std::size_t r) {
        auto stream = rng::replication_stream(pilot_seed, r, 0xB11D);
        vals[r] = f.eval(m, simulate(m, n, stream));
    });
    c.value.assign(static_cast<std::size_t>(d), 0.0);
    std::vector<double> comp(static_cast<std::size_t>(pn));
    Vec se(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        for (long r = 0; r < pn; ++r)
            comp[static_cast<std::size_t>(r)] = vals[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
        c.value[static_cast<std::size_t>(i)] = stats::mean(comp);
        se[static_cast<std::size_t>(i)] =
            3.0 * stats::sample_sd(comp) / std::sqrt(static_cast<double>(pn));
    }
    c.bias_bound = lp_norm(se, m.p);
    return c;
}

std::vector<double> replicate_norms(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                                    std::uint64_t seed, const Vec& center, int threads) {
    int d = f.dim(m);
    check(static_cast<int>(center.size()) == d, "replicate_norms: center has wrong dimension");
    std::vector<double> norms(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t r) {
        auto stream = rng::replication_stream(seed, r);
        Vec v = f.eval(m, simulate(m, n, stream));
        for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] -= center[static_cast<std::size_t>(i)];
        norms[r] = lp_norm(v, m.p);
    });
    return norms;
}

std::vector<double> replicate_norms_serial(const ChainModel& m, const FunctionalSpec& f, long n,
                                           long N, std::uint64_t seed, const Vec& center) {
    int d = f.dim(m);
    check(static_cast<int>(center.size()) == d, "replicate_norms: center has wrong dimension");
    std::vector<double> norms(static_cast<std::size_t>(N));
    serial_for(static_cast<std::size_t>(N), [&](std::size_t r) {
        auto stream = rng::replication_stream(seed, r);
        Vec v = f.eval(m, simulate(m, n, stream));
        for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] -= center[static_cast<std::size_t>(i)];
        norms[r] = lp_norm(v, m.p);
    });
    return norms;
}

std::vector<double> default_x_grid(const std::vector<double>& norms) {
    check(!norms.empty(), "default_x_grid: empty sample");
    double med = stats::median(norms);
    double top = *std::max_element(norms.begin(), norms.end()) * 1.5;
    if (med <= 0.0) med = top > 0.0 ? top * 1e-3 : 1e-3;
    if (top <= med) top = med * 10.0;
    std::vector<double> grid(40);
    double l0 = std::log(med), l1 = std::log(top);
    for (int i = 0; i < 40; ++i) grid[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / 39.0);
    return grid;
}

TailEstimate estimate_tail(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                           std::vector<double> x_grid, std::uint64_t seed, int threads,
                           std::uint64_t pilot_seed) {
    check(N >= 1000, "estimate_tail: need at least 10^3 replications");
    Centering c = compute_centering(m, f, n, N, seed, pilot_seed);
    auto norms = replicate_norms(m, f, n, N, seed, c.value, threads);
    return assemble_tail(m, f, norms, std::move(x_grid), n, N, c.bias_bound);
}

TailEstimate estimate_tail_serial(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                                  std::vector<double> x_grid, std::uint64_t seed,
                                  std::uint64_t pilot_seed) {
    check(N >= 1000, "estimate_tail: need at least 10^3 replications");
    Centering c = compute_centering(m, f, n, N, seed, pilot_seed);
    auto norms = replicate_norms_serial(m, f, n, N, seed, c.value);
    return assemble_tail(m, f, norms, std::move(x_grid), n, N, c.bias_bound);
}

TailEstimate enumerate_exact_tail(const ChainModel& m, const FunctionalSpec& f, long n,
                                  std::vector<double> x_grid, int threads) {
    check(n >= 2, "enumerate_exact_tail: n must be at least 2");
    check(m.init.deterministic, "enumerate_exact_tail: deterministic initial state required");
    check(m.noise.finite_atoms(), "enumerate_exact_tail: noise must have finite support");
    check(m.example != Example::ProjectedSGD && m.example != Example::Subsampled,
          "enumerate_exact_tail: composite innovations not supported");
    auto atoms = m.noise.atoms();
    const long arity = static_cast<long>(atoms.size());
    double paths_f = std::pow(static_cast<double>(arity), static_cast<double>(n - 1));
    check(paths_f <= static_cast<double>(1L << 20),
          "enumerate_exact_tail: path count " + std::to_string(paths_f) + " exceeds 2^20");
    const long paths = static_cast<long>(paths_f + 0.5);
    const int d = f.dim(m);

    std::vector<double> probs(static_cast<std::size_t>(paths));
    std::vector<Vec> fvals(static_cast<std::size_t>(paths));
    parallel_for(static_cast<std::size_t>(paths), threads, [&](std::size_t idx) {
        long code = static_cast<long>(idx);
        double prob = 1.0;
        std::vector<Vec> traj;
        traj.reserve(static_cast<std::size_t>(n));
        traj.push_back(m.init.x1);
        NoiseDraw draw;
        for (long k = 2; k <= n; ++k) {
            long a = code % arity;
            code /= arity;
            prob *= atoms[static_cast<std::size_t>(a)].second;
            draw.value = atoms[static_cast<std::size_t>(a)].first;
            traj.push_back(apply_step(m, k, traj.back(), draw));
        }
        probs[idx] = prob;
        fvals[idx] = f.eval(m, traj);
    });

    double total_prob = stats::pairwise_sum(probs);
    check(std::fabs(total_prob - 1.0) < 1e-12, "enumerate_exact_tail: path probabilities must sum to 1");

    Vec ef(static_cast<std::size_t>(d), 0.0);
    {
        std::vector<double> comp(static_cast<std::size_t>(paths));
        for (int i = 0; i < d; ++i) {
            for (long r = 0; r < paths; ++r)
                comp[static_cast<std::size_t>(r)] =
                    probs[static_cast<std::size_t>(r)] * fvals[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
            ef[static_cast<std::size_t>(i)] = stats::pairwise_sum(comp);
        }
    }
    std::vector<double> norms(static_cast<std::size_t>(paths));
    for (long r = 0; r < paths; ++r) {
        Vec v = fvals[static_cast<std::size_t>(r)];
        for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] -= ef[static_cast<std::size_t>(i)];
        norms[static_cast<std::size_t>(r)] = lp_norm(v, m.p);
    }

    TailEstimate t;
    std::sort(x_grid.begin(), x_grid.end());
    t.x_grid = x_grid.empty() ? default_x_grid(norms) : std::move(x_grid);
    t.N = paths;
    t.n = n;
    t.d = d;
    t.p = m.p;
    t.model_tag = m.tag;
    t.exact = true;
    for (double u : t.x_grid) {
        long c = 0;
        std::vector<double> mass;
        mass.reserve(static_cast<std::size_t>(paths));
        for (long r = 0; r < paths; ++r)
            if (norms[static_cast<std::size_t>(r)] >= u) {
                ++c;
                mass.push_back(probs[static_cast<std::size_t>(r)]);
            }
        double pv = stats::pairwise_sum(mass);
        t.counts.push_back(c);
        t.p_hat.push_back(pv);
        t.p_lcb_99.push_back(pv);
        t.p_ucb_99.push_back(pv);
    }
    return t;
}

MomentEstimate estimate_moment_norm(const ChainModel& m, const FunctionalSpec& f, long n, long N,
                                    double q, std::uint64_t seed, int threads) {
    check(q >= 1.0 && q <= 8.0, "estimate_moment_norm: q must lie in [1,8]");
    check(N >= 10000, "estimate_moment_norm: need at least 10^4 replications");
    Centering c = compute_centering(m, f, n, N, seed, 0);
    int d = f.dim(m);
    std::vector<double> qnorms(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t r) {
        auto stream = rng::replication_stream(seed, r);
        Vec v = f.eval(m, simulate(m, n, stream));
        for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] -= c.value[static_cast<std::size_t>(i)];
        qnorms[r] = lp_norm(v, q);
    });
    MomentEstimate e;
    e.N = N;
    e.estimate = stats::mean(qnorms);
    double se = stats::sample_sd(qnorms) / std::sqrt(static_cast<double>(N));
    double z99 = stats::normal_quantile(0.99);
    e.ucb_99 = e.estimate + c.bias_bound + 1.5 * z99 * se;
    return e;
}

DominationReport check_domination(const TailEstimate& tail, const BoundEnvelope& env) {
    check(env.kind() == BoundKind::Custom || tail.d == env.d(),
          "check_domination: dimension mismatch between tail and envelope");
    check(env.kind() == BoundKind::Custom || tail.p == env.p(),
          "check_domination: norm index mismatch between tail and envelope");
    if (env.n() > 0)
        check(tail.n == env.n(), "check_domination: horizon mismatch between tail and envelope");
    DominationReport rep;
    rep.envelope_tag = env.tag();
    std::vector<double> margins;
    for (std::size_t i = 0; i < tail.x_grid.size(); ++i) {
        double u = tail.x_grid[i];
        double bound = env.eval(u);
        double lcb = tail.p_lcb_99[i];
        bool ok = !(lcb > bound * (1.0 + 1e-12) + 1e-15);
        rep.bounds.push_back(bound);
        rep.ok.push_back(ok);
        margins.push_back(bound - lcb);
        if (!ok) rep.violations.push_back({u, lcb, bound});
    }
    rep.pass = rep.violations.empty();
    rep.min_margin = margins.empty() ? 0.0 : *std::min_element(margins.begin(), margins.end());
    rep.median_margin = margins.empty() ? 0.0 : stats::median(margins);
    return rep;
}

}  // namespace nhmc

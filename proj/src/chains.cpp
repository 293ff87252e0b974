#include "nhmc/chains.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nhmc/stats.hpp"

namespace nhmc {

namespace {
constexpr long kMcDraws = 1000000;
}

std::string to_string(Example e) {
    switch (e) {
        case Example::FunctionalAR: return "functional_ar";
        case Example::UnitRoot: return "unit_root";
        case Example::LinearSA: return "linear_sa";
        case Example::ProjectedLinearSA: return "projected_linear_sa";
        case Example::LinearSAScaledNoise: return "linear_sa_scaled_noise";
        case Example::LinearSAAdditive: return "linear_sa_additive";
        case Example::ProjectedSGD: return "projected_sgd";
        case Example::Subsampled: return "subsampled";
    }
    return "?";
}

// ---------------------------------------------------------------- NoiseSpec

NoiseSpec NoiseSpec::gaussian(double sigma, int d) {
    check(sigma > 0.0, "NoiseSpec: sigma must be positive");
    check(d >= 1, "NoiseSpec: dimension must be at least 1");
    NoiseSpec s;
    s.kind = Kind::GaussianIid;
    s.sigma = sigma;
    s.d = d;
    return s;
}

NoiseSpec NoiseSpec::uniform_pm1(int d) {
    check(d >= 1, "NoiseSpec: dimension must be at least 1");
    NoiseSpec s;
    s.kind = Kind::UniformPM1;
    s.d = d;
    return s;
}

NoiseSpec NoiseSpec::two_atom(double a, double b, double pr) {
    check(pr > 0.0 && pr < 1.0, "NoiseSpec: pr must lie in (0,1)");
    NoiseSpec s;
    s.kind = Kind::TwoAtom;
    s.a = a;
    s.b = b;
    s.pr = pr;
    s.d = 1;
    return s;
}

NoiseSpec NoiseSpec::bounded_uniform(double lo, double hi, int d) {
    check(lo < hi, "NoiseSpec: lo must be below hi");
    check(d >= 1, "NoiseSpec: dimension must be at least 1");
    NoiseSpec s;
    s.kind = Kind::BoundedUniform;
    s.lo = lo;
    s.hi = hi;
    s.d = d;
    return s;
}

Vec NoiseSpec::mean() const {
    switch (kind) {
        case Kind::GaussianIid: return Vec(d, 0.0);
        case Kind::UniformPM1: return Vec(d, 0.0);
        case Kind::TwoAtom: return Vec{pr * a + (1.0 - pr) * b};
        case Kind::BoundedUniform: return Vec(d, 0.5 * (lo + hi));
    }
    return {};
}

bool NoiseSpec::bounded() const { return kind != Kind::GaussianIid; }

bool NoiseSpec::finite_atoms() const {
    return kind == Kind::TwoAtom || kind == Kind::UniformPM1;
}

std::vector<std::pair<Vec, double>> NoiseSpec::atoms() const {
    check(finite_atoms(), "NoiseSpec::atoms: law has no finite support");
    std::vector<std::pair<Vec, double>> out;
    if (kind == Kind::TwoAtom) {
        out.push_back({Vec{a}, pr});
        out.push_back({Vec{b}, 1.0 - pr});
        return out;
    }
    check(d <= 20, "NoiseSpec::atoms: sign support too large");
    long total = 1L << d;
    double prob = 1.0 / static_cast<double>(total);
    for (long mask = 0; mask < total; ++mask) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = (mask >> i) & 1 ? 1.0 : -1.0;
        out.push_back({std::move(v), prob});
    }
    return out;
}

Vec NoiseSpec::sample(rng::Stream& stream) const {
    Vec v(d);
    switch (kind) {
        case Kind::GaussianIid:
            for (int i = 0; i < d; ++i) v[i] = sigma * stream.next_normal();
            break;
        case Kind::UniformPM1:
            for (int i = 0; i < d; ++i) v[i] = stream.next_u64() & 1 ? 1.0 : -1.0;
            break;
        case Kind::TwoAtom:
            v[0] = stream.next_uniform() < pr ? a : b;
            break;
        case Kind::BoundedUniform:
            for (int i = 0; i < d; ++i) v[i] = lo + (hi - lo) * stream.next_uniform();
            break;
    }
    return v;
}

InitSpec InitSpec::point(Vec x1) {
    InitSpec s;
    s.deterministic = true;
    s.x1 = std::move(x1);
    s.tail = InitialTailSpec::deterministic();
    return s;
}

InitSpec InitSpec::random(NoiseSpec dist, InitialTailSpec tail) {
    InitSpec s;
    s.deterministic = false;
    s.dist = dist;
    s.tail = tail;
    return s;
}

Vec InitSpec::sample(rng::Stream& stream) const {
    return deterministic ? x1 : dist.sample(stream);
}

Vec project_ball(const Vec& x, double radius) {
    double n2 = lp_norm(x, 2.0);
    if (n2 <= radius || n2 == 0.0) return x;
    Vec y = x;
    double f = radius / n2;
    for (double& v : y) v *= f;
    return y;
}

// ------------------------------------------------------------ constructors

namespace {

double pow_n(long n, double alpha) { return std::pow(static_cast<double>(n), alpha); }

void check_init_dim(const InitSpec& init, int d) {
    if (init.deterministic)
        check(static_cast<int>(init.x1.size()) == d, "make_model: initial point has wrong dimension");
    else
        check(init.dist.d == d, "make_model: initial distribution has wrong dimension");
}

}  // namespace

ChainModel make_functional_ar(const Mat& R, const Vec& g0, const NoiseSpec& noise,
                              const InitSpec& init, double p) {
    ChainModel m;
    m.example = Example::FunctionalAR;
    m.d = R.n;
    m.p = p;
    m.R = R;
    m.g0 = g0;
    m.noise = noise;
    m.init = init;
    check(static_cast<int>(g0.size()) == m.d, "make_functional_ar: offset has wrong dimension");
    check(noise.d == m.d, "make_functional_ar: noise has wrong dimension");
    check_init_dim(init, m.d);
    m.r_norm = lambda_max_p(R, p);
    check(m.r_norm < 1.0, "make_functional_ar: map must contract, lambda_max(R) < 1");
    double rho_cls = std::min(1.0 - m.r_norm, 1.0 - 1e-12);
    double rn = m.r_norm;
    m.schedule = make_formula_schedule(Regime::C15, 0.0, rho_cls, 1.0,
                                       [rn](long) { return ScheduleTriple{rn, 1.0, 0.0}; });
    m.tag = "functional_ar";
    return m;
}

ChainModel make_unit_root(double c, double alpha, bool reciprocal, const NoiseSpec& noise,
                          const InitSpec& init) {
    check(c > 0.0 && c < 1.0, "make_unit_root: c must lie in (0,1)");
    check(alpha > 0.0 && alpha < 1.0, "make_unit_root: alpha must lie in (0,1)");
    check(noise.d == 1, "make_unit_root: scalar chain");
    ChainModel m;
    m.example = Example::UnitRoot;
    m.d = 1;
    m.p = 2.0;
    m.c = c;
    m.alpha = alpha;
    m.reciprocal = reciprocal;
    m.noise = noise;
    m.init = init;
    check_init_dim(init, 1);
    double rho_cls = reciprocal ? c / (1.0 + c) : c;
    m.schedule = make_formula_schedule(Regime::C16, alpha, rho_cls, 1.0, [c, alpha, reciprocal](long n) {
        double u = c / pow_n(n, alpha);
        double r = reciprocal ? 1.0 / (1.0 + u) : 1.0 - u;
        return ScheduleTriple{r, 1.0, 0.0};
    });
    m.tag = reciprocal ? "unit_root_reciprocal" : "unit_root";
    return m;
}

namespace {

ChainModel make_linear_common(Example ex, const Mat& A, const Vec& B, double gamma, double alpha,
                              const NoiseSpec& noise, const InitSpec& init, double p) {
    ChainModel m;
    m.example = ex;
    m.d = A.n;
    m.p = p;
    m.A = A;
    m.B = B;
    m.gamma = gamma;
    m.alpha = alpha;
    m.noise = noise;
    m.init = init;
    check(static_cast<int>(B.size()) == m.d, "make_model: B has wrong dimension");
    check(noise.d == m.d, "make_model: noise has wrong dimension");
    check_init_dim(init, m.d);
    check(gamma > 0.0, "make_model: gamma must be positive");
    m.lambda_min = lambda_min_p(A, p);
    m.lambda_max = lambda_max_p(A, p);
    check(m.lambda_min > 0.0, "make_model: lambda_min(A) must be positive");
    check(gamma * m.lambda_min <= 1.0, "make_model: gamma lambda_min(A) must lie in (0,1]");
    check(gamma * m.lambda_max <= 1.0, "make_model: gamma lambda_max(A) must not exceed 1");
    return m;
}

}  // namespace

ChainModel make_linear_sa(const Mat& A, const Vec& B, double gamma, double alpha,
                          const NoiseSpec& noise, const InitSpec& init, double p) {
    check(alpha >= 0.0 && alpha < 1.0, "make_linear_sa: alpha must lie in [0,1)");
    ChainModel m = make_linear_common(Example::LinearSA, A, B, gamma, alpha, noise, init, p);
    double gl = gamma * m.lambda_min, g = gamma;
    double rho_cls = std::min(gl, 1.0 - 1e-12);
    m.schedule = make_formula_schedule(Regime::C15, alpha, rho_cls, gamma, [gl, g, alpha](long n) {
        double na = pow_n(n, alpha);
        return ScheduleTriple{1.0 - gl / na, g / na, 0.0};
    });
    m.tag = "linear_sa";
    return m;
}

ChainModel make_projected_linear_sa(const Mat& A, const Vec& B, double gamma, double alpha,
                                    double D_proj, const NoiseSpec& noise, const InitSpec& init) {
    check(alpha >= 0.0 && alpha < 1.0, "make_projected_linear_sa: alpha must lie in [0,1)");
    check(D_proj > 0.0, "make_projected_linear_sa: projection radius must be positive");
    ChainModel m =
        make_linear_common(Example::ProjectedLinearSA, A, B, gamma, alpha, noise, init, 2.0);
    if (alpha == 0.0)
        check(gamma < 1.0 / m.lambda_min, "make_projected_linear_sa: alpha = 0 requires gamma < 1/lambda");
    if (m.init.deterministic)
        check(lp_norm(m.init.x1, 2.0) <= D_proj + 1e-12,
              "make_projected_linear_sa: initial point must lie in the projection ball");
    m.D_proj = D_proj;
    double gl = gamma * m.lambda_min, g = gamma;
    double xi0 = 2.0 * D_proj * gamma * m.lambda_max;
    double rho_cls = std::min(gl, 1.0 - 1e-12);
    m.schedule = make_formula_schedule(Regime::C15, alpha, rho_cls, std::max(gamma, xi0),
                                       [gl, g, xi0, alpha](long n) {
                                           double na = pow_n(n, alpha);
                                           return ScheduleTriple{1.0 - gl / na, g / na, xi0 / na};
                                       });
    m.tag = "projected_linear_sa";
    return m;
}

ChainModel make_linear_sa_scaled_noise(const Mat& A, const Vec& B, double gamma, double alpha,
                                       const NoiseSpec& noise, const InitSpec& init, double p) {
    check(alpha > 0.0 && alpha <= 1.0, "make_linear_sa_scaled_noise: alpha must lie in (0,1]");
    ChainModel m =
        make_linear_common(Example::LinearSAScaledNoise, A, B, gamma, alpha, noise, init, p);
    double rho_c = 1.0 - gamma * m.lambda_min, g = gamma;
    double rho_cls = std::min(std::max(rho_c, 1e-12), 1.0 - 1e-12);
    m.schedule = make_formula_schedule(Regime::C17, alpha, rho_cls, gamma, [rho_c, g, alpha](long n) {
        return ScheduleTriple{rho_c, g / pow_n(n, alpha), 0.0};
    });
    m.tag = "linear_sa_scaled_noise";
    return m;
}

ChainModel make_linear_sa_additive(const Mat& A, const Vec& B, double gamma, double alpha,
                                   const NoiseSpec& noise, const InitSpec& init, double p) {
    check(alpha > 0.0 && alpha < 1.0, "make_linear_sa_additive: alpha must lie in (0,1)");
    ChainModel m =
        make_linear_common(Example::LinearSAAdditive, A, B, gamma, alpha, noise, init, p);
    double gl = gamma * m.lambda_min, g = gamma;
    double rho_cls = std::min(gl, 1.0 - 1e-12);
    m.schedule = make_formula_schedule(Regime::C16, alpha, rho_cls, gamma, [gl, g, alpha](long n) {
        return ScheduleTriple{1.0 - gl / pow_n(n, alpha), g, 0.0};
    });
    m.tag = "linear_sa_additive";
    return m;
}

ChainModel make_projected_sgd(const std::vector<QuadraticTerm>& terms, int minibatch,
                              double D_proj, double gamma, double alpha,
                              const std::optional<NoiseSpec>& eta, const InitSpec& init) {
    check(!terms.empty(), "make_projected_sgd: gradient family must be nonempty");
    check(minibatch >= 1 && minibatch <= static_cast<int>(terms.size()),
          "make_projected_sgd: minibatch size must lie in [1, #terms]");
    check(D_proj > 0.0, "make_projected_sgd: projection radius must be positive");
    check(gamma > 0.0, "make_projected_sgd: gamma must be positive");
    check(alpha >= 0.0 && alpha < 1.0, "make_projected_sgd: alpha must lie in [0,1)");
    ChainModel m;
    m.example = Example::ProjectedSGD;
    m.d = static_cast<int>(terms.front().center.size());
    m.p = 2.0;
    m.terms = terms;
    m.minibatch = minibatch;
    m.D_proj = D_proj;
    m.gamma = gamma;
    m.alpha = alpha;
    m.init = init;
    check_init_dim(init, m.d);
    if (m.init.deterministic)
        check(lp_norm(m.init.x1, 2.0) <= D_proj + 1e-12,
              "make_projected_sgd: initial point must lie in the projection ball");
    double mmin = terms.front().weight, mmax = terms.front().weight, bmax = 0.0;
    for (const auto& t : terms) {
        check(static_cast<int>(t.center.size()) == m.d,
              "make_projected_sgd: centers must share one dimension");
        check(t.weight > 0.0, "make_projected_sgd: losses must be strongly convex (weight > 0)");
        mmin = std::min(mmin, t.weight);
        mmax = std::max(mmax, t.weight);
        bmax = std::max(bmax, t.weight * (D_proj + lp_norm(t.center, 2.0)));
    }
    m.m_strong = mmin;
    m.l_lip = mmax;
    m.grad_bound = bmax;
    if (alpha == 0.0) {
        double v = 2.0 * mmin * gamma - mmax * mmax * gamma * gamma;
        check(v > 0.0 && v < 1.0, "make_projected_sgd: alpha = 0 requires 2 m gamma - l^2 gamma^2 in (0,1)");
    } else {
        check(gamma < 2.0 * mmin * pow_n(2, alpha) / (mmax * mmax),
              "make_projected_sgd: gamma too large for contraction at n = 2");
    }
    if (eta) {
        check(eta->d == m.d, "make_projected_sgd: perturbation has wrong dimension");
        m.noise = *eta;
        m.has_noise = true;
    } else {
        m.noise = NoiseSpec::gaussian(1.0, m.d);  // placeholder law; never sampled
        m.has_noise = false;
    }
    // rho_n^2 = 1 - (gamma/n^a)(2m - l^2 gamma/n^a), so
    // 1 - rho_n >= (gamma/n^a)(2m - l^2 gamma/2^a)/2 for every n >= 2.
    double slack = gamma * (2.0 * mmin - mmax * mmax * gamma / pow_n(2, alpha)) / 2.0;
    double rho_cls = std::min(slack, 1.0 - 1e-12);
    double eta_cls = gamma * std::max(1.0, 2.0 * bmax);
    double g = gamma, ms = mmin, ll = mmax, bb = bmax;
    m.schedule = make_formula_schedule(Regime::C15, alpha, rho_cls, eta_cls, [=](long n) {
        double u = g / pow_n(n, alpha);
        double r2 = (1.0 - ms * u) * (1.0 - ms * u) + (ll * ll - ms * ms) * u * u;
        return ScheduleTriple{std::sqrt(std::max(r2, 0.0)), u, 2.0 * bb * u};
    });
    m.tag = eta ? "projected_sgld" : "projected_sgd";
    return m;
}

ChainModel make_subsampled(ChainModel inner, const std::vector<long>& gaps) {
    check(inner.example == Example::FunctionalAR,
          "make_subsampled: inner chain must be the homogeneous additive model");
    check(!gaps.empty(), "make_subsampled: gap sequence must be nonempty");
    check(inner.noise.bounded(), "make_subsampled: sup-metric blocks need bounded innovations");
    ChainModel m;
    m.example = Example::Subsampled;
    m.d = inner.d;
    m.p = inner.p;
    m.init = inner.init;
    m.noise = inner.noise;
    m.gaps = gaps;
    double rho_in = inner.r_norm;
    long kmin = *std::min_element(gaps.begin(), gaps.end());
    for (long k : gaps) check(k >= 1, "make_subsampled: gaps must be positive");
    CustomSequences seq;
    for (long k : gaps) {
        double rk = std::pow(rho_in, static_cast<double>(k));
        seq.rho.push_back(rk);
        seq.tau.push_back((1.0 - rk) / (1.0 - rho_in));
        seq.xi.push_back(0.0);
    }
    double rho_cls = std::min(1.0 - std::pow(rho_in, static_cast<double>(kmin)), 1.0 - 1e-12);
    m.schedule = make_schedule(Regime::C15, 0.0, rho_cls, 1.0 / (1.0 - rho_in), seq);
    m.inner = std::make_shared<const ChainModel>(std::move(inner));
    m.tag = "subsampled";
    return m;
}

// ------------------------------------------------------------------ stepping

NoiseDraw sample_noise(const ChainModel& m, long n, rng::Stream& stream) {
    check(n >= 2, "sample_noise: n must be at least 2");
    NoiseDraw d;
    switch (m.example) {
        case Example::ProjectedSGD: {
            // Partial Fisher-Yates over term indices.
            std::vector<int> idx(m.terms.size());
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = 0; i < m.minibatch; ++i) {
                std::size_t j = i + static_cast<std::size_t>(stream.next_below(idx.size() - i));
                std::swap(idx[i], idx[j]);
            }
            d.batch.assign(idx.begin(), idx.begin() + m.minibatch);
            if (m.has_noise) d.value = m.noise.sample(stream);
            return d;
        }
        case Example::Subsampled: {
            long k = m.gaps[static_cast<std::size_t>(n - 2)];
            d.block.reserve(static_cast<std::size_t>(k));
            for (long i = 0; i < k; ++i) d.block.push_back(m.inner->noise.sample(stream));
            return d;
        }
        default:
            d.value = m.noise.sample(stream);
            return d;
    }
}

Vec apply_step(const ChainModel& m, long n, const Vec& x, const NoiseDraw& draw) {
    check(n >= 2, "step: n must be at least 2");
    check(static_cast<int>(x.size()) == m.d, "step: state has wrong dimension");
    double na = pow_n(n, m.alpha);
    Vec y(m.d, 0.0);
    switch (m.example) {
        case Example::FunctionalAR: {
            y = m.R.mul(x);
            for (int i = 0; i < m.d; ++i) y[i] += m.g0[i] + draw.value[i];
            break;
        }
        case Example::UnitRoot: {
            double u = m.c / pow_n(n, m.alpha);
            double f = m.reciprocal ? 1.0 / (1.0 + u) : 1.0 - u;
            y[0] = f * x[0] + draw.value[0];
            break;
        }
        case Example::LinearSA: {
            Vec ax = m.A.mul(x);
            for (int i = 0; i < m.d; ++i)
                y[i] = x[i] - m.gamma / na * (ax[i] - m.B[i] + draw.value[i]);
            break;
        }
        case Example::ProjectedLinearSA: {
            Vec w = project_ball(x, m.D_proj);
            Vec aw = m.A.mul(w);
            for (int i = 0; i < m.d; ++i)
                y[i] = w[i] - m.gamma / na * (aw[i] - m.B[i] + draw.value[i]);
            y = project_ball(y, m.D_proj);
            break;
        }
        case Example::LinearSAScaledNoise: {
            Vec ax = m.A.mul(x);
            for (int i = 0; i < m.d; ++i)
                y[i] = x[i] - m.gamma * (ax[i] - m.B[i]) - m.gamma / na * draw.value[i];
            break;
        }
        case Example::LinearSAAdditive: {
            Vec ax = m.A.mul(x);
            for (int i = 0; i < m.d; ++i)
                y[i] = x[i] - m.gamma / na * (ax[i] - m.B[i]) - m.gamma * draw.value[i];
            break;
        }
        case Example::ProjectedSGD: {
            Vec grad(m.d, 0.0);
            for (int j : draw.batch) {
                const auto& t = m.terms[static_cast<std::size_t>(j)];
                for (int i = 0; i < m.d; ++i) grad[i] += t.weight * (x[i] - t.center[i]);
            }
            for (int i = 0; i < m.d; ++i) {
                grad[i] /= m.minibatch;
                y[i] = x[i] - m.gamma / na * grad[i];
                if (m.has_noise) y[i] -= m.gamma / na * draw.value[i];
            }
            y = project_ball(y, m.D_proj);
            break;
        }
        case Example::Subsampled: {
            y = x;
            for (const Vec& e : draw.block) {
                NoiseDraw inner_draw;
                inner_draw.value = e;
                y = apply_step(*m.inner, 2, y, inner_draw);
            }
            break;
        }
    }
    for (double v : y)
        if (!std::isfinite(v))
            throw std::runtime_error("step: non-finite state at n = " + std::to_string(n));
    return y;
}

Vec step(const ChainModel& m, long n, const Vec& x, rng::Stream& stream) {
    return apply_step(m, n, x, sample_noise(m, n, stream));
}

std::vector<Vec> simulate(const ChainModel& m, long n, rng::Stream& stream) {
    check(n >= 1, "simulate: n must be at least 1");
    std::vector<Vec> traj;
    traj.reserve(static_cast<std::size_t>(n));
    traj.push_back(m.init.sample(stream));
    for (long k = 2; k <= n; ++k) traj.push_back(step(m, k, traj.back(), stream));
    return traj;
}

std::vector<Vec> simulate(const ChainModel& m, long n, std::uint64_t seed) {
    rng::Stream stream(seed);
    return simulate(m, n, stream);
}

double noise_delta(const ChainModel& m, const NoiseDraw& y, const NoiseDraw& yp) {
    switch (m.example) {
        case Example::ProjectedSGD: {
            if (!m.has_noise) return 0.0;
            Vec diff(m.d);
            for (int i = 0; i < m.d; ++i) diff[i] = y.value[i] - yp.value[i];
            return lp_norm(diff, 2.0);
        }
        case Example::Subsampled: {
            double s = 0.0;
            std::size_t len = std::min(y.block.size(), yp.block.size());
            for (std::size_t i = 0; i < len; ++i) {
                Vec diff(m.d);
                for (int j = 0; j < m.d; ++j) diff[j] = y.block[i][j] - yp.block[i][j];
                s = std::max(s, lp_norm(diff, m.inner->p));
            }
            return s;
        }
        default: {
            Vec diff(m.d);
            for (int i = 0; i < m.d; ++i) diff[i] = y.value[i] - yp.value[i];
            return lp_norm(diff, m.p);
        }
    }
}

// ------------------------------------------------- dominating variable G

namespace {

double folded_mean(double y, double sigma) {
    double ay = std::fabs(y);
    return sigma * std::sqrt(2.0 / M_PI) * std::exp(-y * y / (2.0 * sigma * sigma)) +
           ay * (1.0 - 2.0 * stats::normal_cdf(-ay / sigma));
}

double law_g_mc(const NoiseSpec& law, double p, const Vec& y, double* se_out) {
    rng::Stream stream(rng::hash64(0xC0FFEEULL, law.d * 131 + static_cast<int>(law.kind)));
    std::vector<double> vals(kMcDraws);
    Vec diff(law.d);
    for (long i = 0; i < kMcDraws; ++i) {
        Vec e = law.sample(stream);
        for (int j = 0; j < law.d; ++j) diff[j] = y[j] - e[j];
        vals[static_cast<std::size_t>(i)] = lp_norm(diff, p);
    }
    double mval = stats::mean(vals);
    if (se_out) *se_out = stats::sample_sd(vals) / std::sqrt(static_cast<double>(kMcDraws));
    return mval;
}

// E||y - eps'||_p for an innovation law; closed form where available.
double law_g(const NoiseSpec& law, double p, const Vec& y, double* se_out) {
    if (se_out) *se_out = 0.0;
    check(static_cast<int>(y.size()) == law.d, "g: point has wrong dimension");
    switch (law.kind) {
        case NoiseSpec::Kind::TwoAtom:
            return law.pr * std::fabs(y[0] - law.a) + (1.0 - law.pr) * std::fabs(y[0] - law.b);
        case NoiseSpec::Kind::UniformPM1: {
            if (law.d > 16) return law_g_mc(law, p, y, se_out);
            auto at = law.atoms();
            double s = 0.0;
            Vec diff(law.d);
            for (const auto& [v, prob] : at) {
                for (int j = 0; j < law.d; ++j) diff[j] = y[j] - v[j];
                s += prob * lp_norm(diff, p);
            }
            return s;
        }
        case NoiseSpec::Kind::BoundedUniform: {
            if (law.d > 1) return law_g_mc(law, p, y, se_out);
            double v = y[0];
            if (v <= law.lo) return 0.5 * (law.lo + law.hi) - v;
            if (v >= law.hi) return v - 0.5 * (law.lo + law.hi);
            double w = law.hi - law.lo;
            return ((v - law.lo) * (v - law.lo) + (law.hi - v) * (law.hi - v)) / (2.0 * w);
        }
        case NoiseSpec::Kind::GaussianIid: {
            if (law.d > 1) return law_g_mc(law, p, y, se_out);
            return folded_mean(y[0], law.sigma);
        }
    }
    return 0.0;
}

// esssup over draws of E||eps - eps'||_p; bounded laws only.
double law_g_ess_sup(const NoiseSpec& law, double p) {
    check(law.bounded(), "derive_constants: dominating variable unbounded for this law");
    switch (law.kind) {
        case NoiseSpec::Kind::TwoAtom: {
            double ga = law_g(law, p, Vec{law.a}, nullptr);
            double gb = law_g(law, p, Vec{law.b}, nullptr);
            return std::max(ga, gb);
        }
        case NoiseSpec::Kind::UniformPM1:
            // G is the same at every sign vector by symmetry.
            return law_g(law, p, Vec(law.d, 1.0), nullptr);
        case NoiseSpec::Kind::BoundedUniform: {
            if (law.d == 1) return 0.5 * (law.hi - law.lo);
            // diameter bound, valid in any dimension
            return (law.hi - law.lo) * d_to_inv_p(law.d, p);
        }
        default:
            break;
    }
    throw std::invalid_argument("derive_constants: unsupported law");
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += (i & 1 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double chi_moment(int d, double q, double sigma) {
    // E||eps||_2^q for i.i.d. N(0, sigma^2) coordinates.
    return std::pow(sigma, q) * std::pow(2.0, q / 2.0) *
           std::exp(std::lgamma((d + q) / 2.0) - std::lgamma(d / 2.0));
}

double p_to_2_factor(int d, double p) {
    // c with ||y||_p <= c ||y||_2.
    if (std::isinf(p) || p >= 2.0) return 1.0;
    return std::pow(static_cast<double>(d), 1.0 / p - 0.5);
}

// E[G(eps)^q]; a valid upper bound, exact where the law is simple.
double law_g_moment(const NoiseSpec& law, double p, double q, bool& estimated) {
    check(q > 0.0, "law_g_moment: q must be positive");
    switch (law.kind) {
        case NoiseSpec::Kind::TwoAtom: {
            double ga = law_g(law, p, Vec{law.a}, nullptr);
            double gb = law_g(law, p, Vec{law.b}, nullptr);
            return law.pr * std::pow(ga, q) + (1.0 - law.pr) * std::pow(gb, q);
        }
        case NoiseSpec::Kind::UniformPM1:
            return std::pow(law_g_ess_sup(law, p), q);
        case NoiseSpec::Kind::BoundedUniform: {
            if (law.d > 1) return std::pow(law_g_ess_sup(law, p), q);
            double w = law.hi - law.lo;
            // G(u) = s^2/w + w/4 with s uniform on [-w/2, w/2]
            return std::pow(w / 4.0, q) *
                   simpson([q](double s) { return std::pow(1.0 + s * s, q); }, 0.0, 1.0, 4096);
        }
        case NoiseSpec::Kind::GaussianIid: {
            // G(eps) <= c_p (||eps||_2 + E||eps||_2)
            double cp = p_to_2_factor(law.d, p);
            double m1 = chi_moment(law.d, 1.0, law.sigma);
            if (q == 2.0)
                return cp * cp * (law.d * law.sigma * law.sigma + 3.0 * m1 * m1);
            (void)estimated;
            return std::pow(cp, q) * std::pow(2.0, q - 1.0) *
                   (chi_moment(law.d, q, law.sigma) + std::pow(m1, q));
        }
    }
    return 0.0;
}

// (E[G^2 e^{G^q}], E[e^{G^q}])
std::pair<double, double> law_g_semiexp(const NoiseSpec& law, double p, double q,
                                        bool& estimated) {
    check(q > 0.0 && q < 1.0, "derive_constants: semi-exponential order must lie in (0,1)");
    auto at_const = [&](double g) {
        double eg = std::exp(std::pow(g, q));
        return std::make_pair(g * g * eg, eg);
    };
    switch (law.kind) {
        case NoiseSpec::Kind::TwoAtom: {
            double ga = law_g(law, p, Vec{law.a}, nullptr);
            double gb = law_g(law, p, Vec{law.b}, nullptr);
            auto [a2, ae] = at_const(ga);
            auto [b2, be] = at_const(gb);
            return {law.pr * a2 + (1.0 - law.pr) * b2, law.pr * ae + (1.0 - law.pr) * be};
        }
        case NoiseSpec::Kind::UniformPM1:
            return at_const(law_g_ess_sup(law, p));
        case NoiseSpec::Kind::BoundedUniform: {
            if (law.d > 1) return at_const(law_g_ess_sup(law, p));
            double w = law.hi - law.lo;
            auto g_of = [w](double s) { return (w / 4.0) * (1.0 + s * s); };
            double m2 = simpson(
                [&](double s) {
                    double g = g_of(s);
                    return g * g * std::exp(std::pow(g, q));
                },
                0.0, 1.0, 4096);
            double me = simpson([&](double s) { return std::exp(std::pow(g_of(s), q)); }, 0.0,
                                1.0, 4096);
            return {m2, me};
        }
        case NoiseSpec::Kind::GaussianIid: {
            // Monte-Carlo over the envelope Ghat >= G, inflated by 3 SE.
            estimated = true;
            double cp = p_to_2_factor(law.d, p);
            double m1 = chi_moment(law.d, 1.0, law.sigma);
            rng::Stream stream(rng::hash64(0x5EEDBEEFULL, law.d));
            const long kN = kMcDraws;
            std::vector<double> v2(kN), ve(kN);
            for (long i = 0; i < kN; ++i) {
                double n2 = 0.0;
                for (int j = 0; j < law.d; ++j) {
                    double z = law.sigma * stream.next_normal();
                    n2 += z * z;
                }
                double ghat = law.d == 1 ? folded_mean(std::sqrt(n2), law.sigma)
                                         : cp * (std::sqrt(n2) + m1);
                double eg = std::exp(std::pow(ghat, q));
                v2[static_cast<std::size_t>(i)] = ghat * ghat * eg;
                ve[static_cast<std::size_t>(i)] = eg;
            }
            double root_n = std::sqrt(static_cast<double>(kN));
            return {stats::mean(v2) + 3.0 * stats::sample_sd(v2) / root_n,
                    stats::mean(ve) + 3.0 * stats::sample_sd(ve) / root_n};
        }
    }
    return {0.0, 0.0};
}

// esssup delta(eps, eps')
double law_delta_ess_sup(const NoiseSpec& law, double p) {
    check(law.bounded(), "derive_constants: delta(eps, eps') unbounded for this law");
    switch (law.kind) {
        case NoiseSpec::Kind::TwoAtom:
            return std::fabs(law.a - law.b);
        case NoiseSpec::Kind::UniformPM1:
            return 2.0 * d_to_inv_p(law.d, p);
        case NoiseSpec::Kind::BoundedUniform:
            return (law.hi - law.lo) * d_to_inv_p(law.d, p);
        default:
            break;
    }
    throw std::invalid_argument("derive_constants: unsupported law");
}

// Bernstein pair (H1, A1) with E[G^k] <= k!/2 H1^{k-2} A1.
std::pair<double, double> law_bernstein(const NoiseSpec& law, double p) {
    if (law.bounded()) {
        bool est = false;
        double T = law_g_ess_sup(law, p);
        double A1 = law_g_moment(law, p, 2.0, est);
        return {std::max(T, 1e-12), std::max(A1, 1e-24)};
    }
    // Per-coordinate moments give E|eps_i|^k <= k!/2 sigma^{k-2} sigma^2, and
    // the p-norm aggregation multiplies by d^{(p+1)/p} per power.
    double e = std::isinf(p) ? 1.0 : (p + 1.0) / p;
    double de = std::pow(static_cast<double>(law.d), e);
    return {2.0 * law.sigma * de, 4.0 * law.sigma * law.sigma * de * de};
}

const NoiseSpec& effective_law(const ChainModel& m) {
    return m.example == Example::Subsampled ? m.inner->noise : m.noise;
}

bool zero_noise(const ChainModel& m) {
    return m.example == Example::ProjectedSGD && !m.has_noise;
}

// Subsampled chains measure blocks in the sup metric, where G is a.s. the
// pair diameter of the inner law.
bool g_is_block_diameter(const ChainModel& m) { return m.example == Example::Subsampled; }

}  // namespace

double g_eps(const ChainModel& m, const Vec& y, double* se_out) {
    if (se_out) *se_out = 0.0;
    if (zero_noise(m)) return 0.0;
    if (g_is_block_diameter(m)) return law_delta_ess_sup(m.inner->noise, m.inner->p);
    return law_g(m.noise, m.example == Example::ProjectedSGD ? 2.0 : m.p, y, se_out);
}

double g_x1(const ChainModel& m, const Vec& x, double* se_out) {
    if (se_out) *se_out = 0.0;
    if (m.init.deterministic) {
        Vec diff(m.d);
        for (int i = 0; i < m.d; ++i) diff[i] = x[i] - m.init.x1[i];
        return lp_norm(diff, m.p);
    }
    return law_g(m.init.dist, m.p, x, se_out);
}

double g_eps_tail(const ChainModel& m, double t) {
    if (zero_noise(m)) return 0.0;
    const NoiseSpec& law = effective_law(m);
    double p = m.p;
    if (g_is_block_diameter(m)) {
        double g = law_delta_ess_sup(law, m.inner->p);
        return t < g ? 1.0 : 0.0;
    }
    switch (law.kind) {
        case NoiseSpec::Kind::TwoAtom: {
            double ga = law_g(law, p, Vec{law.a}, nullptr);
            double gb = law_g(law, p, Vec{law.b}, nullptr);
            double s = 0.0;
            if (ga > t) s += law.pr;
            if (gb > t) s += 1.0 - law.pr;
            return s;
        }
        case NoiseSpec::Kind::UniformPM1: {
            check(law.d <= 16, "g_eps_tail: sign support too large");
            return law_g_ess_sup(law, p) > t ? 1.0 : 0.0;
        }
        case NoiseSpec::Kind::BoundedUniform: {
            check(law.d == 1, "g_eps_tail: scalar law required");
            double w = law.hi - law.lo;
            if (t <= w / 4.0) return 1.0;
            if (t >= w / 2.0) return 0.0;
            return 1.0 - 2.0 * std::sqrt(w * (t - w / 4.0)) / w;
        }
        case NoiseSpec::Kind::GaussianIid: {
            check(law.d == 1, "g_eps_tail: scalar law required");
            // G = h(|eps|) with h increasing; invert by bisection.
            double g0 = folded_mean(0.0, law.sigma);
            if (t <= g0) return 1.0;
            double lo = 0.0, hi = law.sigma;
            while (folded_mean(hi, law.sigma) < t && hi < 1e9 * law.sigma) hi *= 2.0;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (folded_mean(mid, law.sigma) < t ? lo : hi) = mid;
            }
            return 2.0 * stats::normal_cdf(-0.5 * (lo + hi) / law.sigma);
        }
    }
    return 0.0;
}

MomentConstants derive_constants(const ChainModel& m, BoundKind which, double q) {
    MomentConstants mc;
    mc.q = q;
    double p = m.example == Example::ProjectedSGD ? 2.0 : m.p;
    const NoiseSpec& law = effective_law(m);
    bool est = false;

    auto moment = [&](double order) -> double {
        if (zero_noise(m)) return 1e-12;  // G == 0 a.s.; any positive constant is valid
        if (g_is_block_diameter(m)) return std::pow(law_delta_ess_sup(law, m.inner->p), order);
        return law_g_moment(law, p, order, est);
    };
    auto ess_sup_g = [&]() -> double {
        if (zero_noise(m)) return 1e-12;
        if (g_is_block_diameter(m)) return law_delta_ess_sup(law, m.inner->p);
        return law_g_ess_sup(law, p);
    };

    switch (which) {
        case BoundKind::Bernstein: {
            if (zero_noise(m)) {
                mc.H1 = mc.A1 = 1e-12;
            } else if (g_is_block_diameter(m)) {
                double T = ess_sup_g();
                mc.H1 = T;
                mc.A1 = T * T;
            } else {
                auto [h1, a1] = law_bernstein(law, p);
                mc.H1 = h1;
                mc.A1 = a1;
            }
            break;
        }
        case BoundKind::SemiExp: {
            if (zero_noise(m)) {
                mc.A1_semi = mc.Eexp_q = 1.0;
            } else if (g_is_block_diameter(m)) {
                double T = ess_sup_g();
                mc.A1_semi = T * T * std::exp(std::pow(T, q));
                mc.Eexp_q = std::exp(std::pow(T, q));
            } else {
                auto [a, e] = law_g_semiexp(law, p, q, est);
                mc.A1_semi = a;
                mc.Eexp_q = e;
            }
            break;
        }
        case BoundKind::FukNagaev:
            check(q >= 2.0, "derive_constants: Fuk-Nagaev needs q >= 2");
            mc.A1_fn = std::max(moment(2.0), 1e-24);
            mc.B1q = std::max(moment(q), 1e-24);
            break;
        case BoundKind::VBE:
            check(q >= 1.0 && q <= 2.0, "derive_constants: von Bahr-Esseen needs q in [1,2]");
            mc.A1q = std::max(moment(q), 1e-24);
            break;
        case BoundKind::WeakMoment:
            check(q > 1.0 && q < 2.0, "derive_constants: weak moments need q in (1,2)");
            // sup_x x^q P(G > x) <= E[G^q]
            mc.A1q = std::max(moment(q), 1e-24);
            break;
        case BoundKind::McDiarmid:
            if (zero_noise(m))
                mc.T1 = 1e-12;
            else if (g_is_block_diameter(m))
                mc.T1 = law_delta_ess_sup(law, m.inner->p);
            else
                mc.T1 = law_delta_ess_sup(law, p);
            break;
        case BoundKind::Hoeffding:
            mc.A1_fn = std::max(moment(2.0), 1e-24);
            mc.T = (zero_noise(m) || law.bounded()) ? ess_sup_g() : 0.0;
            break;
        case BoundKind::MZ: {
            check(q >= 2.0, "derive_constants: moment bound needs q >= 2");
            mc.B1q = std::max(moment(q), 1e-24);
            if (m.init.deterministic) {
                mc.init_moment_known = true;
            } else {
                bool est_init = false;
                mc.B1q_init = law_g_moment(m.init.dist, m.p, q, est_init);
                est = est || est_init;
            }
            break;
        }
        case BoundKind::VBEMoment: {
            check(q >= 1.0 && q <= 2.0, "derive_constants: moment bound needs q in [1,2]");
            mc.A1q = std::max(moment(q), 1e-24);
            if (m.init.deterministic) {
                mc.init_moment_known = true;
            } else {
                bool est_init = false;
                mc.A1q_init = law_g_moment(m.init.dist, m.p, q, est_init);
                est = est || est_init;
            }
            break;
        }
        case BoundKind::Custom:
            throw std::invalid_argument("derive_constants: no constants for a custom bound");
    }
    mc.estimated = est;
    mc.init_tail = m.init.deterministic ? InitialTailSpec::deterministic() : m.init.tail;
    if (m.init.deterministic) mc.init_moment_known = true;
    return mc;
}

// --------------------------------------------------------------- validation

ContractionReport verify_contraction(const ChainModel& m, long n, long N, std::uint64_t seed,
                                     std::vector<std::pair<Vec, Vec>> probes) {
    check(n >= 2, "verify_contraction: n must be at least 2");
    check(N >= 1000, "verify_contraction: need at least 10^3 paired draws");
    auto triple = m.schedule.eval(n);
    rng::Stream stream(rng::hash64(seed, 0x7C0DE));
    if (probes.empty()) {
        double radius = m.D_proj > 0.0 ? m.D_proj : 2.0;
        for (int t = 0; t < 3; ++t) {
            Vec x(m.d), xp(m.d);
            for (int i = 0; i < m.d; ++i) {
                x[i] = radius * (2.0 * stream.next_uniform() - 1.0) / std::sqrt(double(m.d));
                xp[i] = radius * (2.0 * stream.next_uniform() - 1.0) / std::sqrt(double(m.d));
            }
            probes.push_back({x, xp});
        }
    }
    ContractionReport rep;
    rep.n = n;
    rep.xi_n = triple.xi;
    rep.ok = true;
    const double tol = 1e-9;
    for (auto& [x, xp] : probes) {
        Vec diff(m.d);
        for (int i = 0; i < m.d; ++i) diff[i] = x[i] - xp[i];
        double dist = lp_norm(diff, m.p);
        check(dist > 0.0, "verify_contraction: probe points must differ");
        std::vector<double> ratios(static_cast<std::size_t>(N));
        for (long r = 0; r < N; ++r) {
            auto draw = sample_noise(m, n, stream);
            Vec fx = apply_step(m, n, x, draw);
            Vec fxp = apply_step(m, n, xp, draw);
            for (int i = 0; i < m.d; ++i) diff[i] = fx[i] - fxp[i];
            ratios[static_cast<std::size_t>(r)] = lp_norm(diff, m.p) / dist;
        }
        ContractionProbe pr;
        pr.x = x;
        pr.xp = xp;
        pr.rho_n = triple.rho;
        pr.mean_ratio = stats::mean(ratios);
        pr.se = stats::sample_sd(ratios) / std::sqrt(static_cast<double>(N));
        pr.ok = pr.mean_ratio <= triple.rho + 3.0 * pr.se + tol;
        if (!pr.ok) {
            rep.ok = false;
            rep.violations.push_back("contraction at n=" + std::to_string(n) +
                                     " mean ratio " + std::to_string(pr.mean_ratio) + " > rho " +
                                     std::to_string(triple.rho));
        }
        rep.probes.push_back(std::move(pr));
    }
    // pathwise noise-coupling condition
    const Vec& x0 = probes.front().first;
    double max_res = 0.0;
    for (long r = 0; r < N; ++r) {
        auto y = sample_noise(m, n, stream);
        auto yp = sample_noise(m, n, stream);
        Vec fy = apply_step(m, n, x0, y);
        Vec fyp = apply_step(m, n, x0, yp);
        Vec diff(m.d);
        for (int i = 0; i < m.d; ++i) diff[i] = fy[i] - fyp[i];
        max_res = std::max(max_res, lp_norm(diff, m.p) - triple.tau * noise_delta(m, y, yp));
    }
    rep.max_c2_residual = max_res;
    rep.c2_ok = max_res <= triple.xi + tol;
    if (!rep.c2_ok) {
        rep.ok = false;
        rep.violations.push_back("noise coupling at n=" + std::to_string(n) + " residual " +
                                 std::to_string(max_res) + " > xi " + std::to_string(triple.xi));
    }
    return rep;
}

std::optional<std::vector<Vec>> exact_mean_trajectory(const ChainModel& m, long n) {
    check(n >= 1, "exact_mean_trajectory: n must be at least 1");
    Vec mean_noise = m.noise.mean();
    Vec ex = m.init.deterministic ? m.init.x1 : m.init.dist.mean();
    std::vector<Vec> out{ex};
    for (long k = 2; k <= n; ++k) {
        double na = pow_n(k, m.alpha);
        Vec next(m.d, 0.0);
        switch (m.example) {
            case Example::FunctionalAR: {
                next = m.R.mul(ex);
                for (int i = 0; i < m.d; ++i) next[i] += m.g0[i] + mean_noise[i];
                break;
            }
            case Example::UnitRoot: {
                double u = m.c / na;
                double f = m.reciprocal ? 1.0 / (1.0 + u) : 1.0 - u;
                next[0] = f * ex[0] + mean_noise[0];
                break;
            }
            case Example::LinearSA: {
                Vec ax = m.A.mul(ex);
                for (int i = 0; i < m.d; ++i)
                    next[i] = ex[i] - m.gamma / na * (ax[i] - m.B[i] + mean_noise[i]);
                break;
            }
            case Example::LinearSAScaledNoise: {
                Vec ax = m.A.mul(ex);
                for (int i = 0; i < m.d; ++i)
                    next[i] = ex[i] - m.gamma * (ax[i] - m.B[i]) - m.gamma / na * mean_noise[i];
                break;
            }
            case Example::LinearSAAdditive: {
                Vec ax = m.A.mul(ex);
                for (int i = 0; i < m.d; ++i)
                    next[i] = ex[i] - m.gamma / na * (ax[i] - m.B[i]) - m.gamma * mean_noise[i];
                break;
            }
            default:
                return std::nullopt;  // projections and compositions are not affine in the mean
        }
        ex = next;
        out.push_back(ex);
    }
    return out;
}

}  // namespace nhmc

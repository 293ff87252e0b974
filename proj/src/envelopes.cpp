#include "nhmc/envelopes.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "nhmc/common.hpp"

namespace nhmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTiny = std::log(1e-300);

std::string q_tag(const char* stem, double q) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_q%.4g", stem, q);
    return buf;
}

double logsumexp2(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double i1_term(double x, double K1n, int d, const InitialTailSpec& init) {
    check(x > 0.0, "i1_term: x must be positive");
    check(K1n >= 1.0, "i1_term: K1n must be at least 1");
    double z = x / (2.0 * K1n);
    switch (init.kind) {
        case InitialTailSpec::Kind::Deterministic:
            return 0.0;
        case InitialTailSpec::Kind::ExpTail:
            return d / init.c * std::exp(-init.c * z);
        case InitialTailSpec::Kind::SemiExpTail:
            return d / init.c * std::exp(-init.c * std::pow(z, init.q));
        case InitialTailSpec::Kind::PolyTail:
            return init.c * d * std::pow(z, -init.q);
        case InitialTailSpec::Kind::BoundedDiameter:
            return x > 2.0 * K1n * init.T0 ? 0.0 : 1.0;
    }
    return 1.0;
}

double ell(double t) {
    check(t > 0.0, "ell: t must be positive");
    double a = t - std::log(t) - 1.0;
    double b = t > 700.0 ? 0.0 : t / std::expm1(t);
    double c = std::log1p(-std::exp(-t));
    return a + b + c;
}

double ell_star_numeric(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return std::numeric_limits<double>::infinity();
    auto phi = [x](double t) { return x * t - ell(t); };
    // phi is concave; bracket the maximizer, then golden-section.
    double hi = 1.0;
    while (hi < 1e9 && phi(2.0 * hi) > phi(hi)) hi *= 2.0;
    hi *= 2.0;
    double lo = 1e-12;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = phi(c1), f2 = phi(c2);
    for (int it = 0; it < 300 && (b - a) > 1e-13 * (1.0 + b); ++it) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = phi(c2);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = phi(c1);
        }
    }
    return std::max(0.0, std::max(f1, f2));
}

double ell_star(double x) {
    if (x >= 1.0) return std::numeric_limits<double>::infinity();
    if (x <= 0.0) return 0.0;
    double floor = (x * x - 2.0 * x) * std::log1p(-x);
    return std::max(ell_star_numeric(x), floor);
}

double hoeffding_H(double x, double v, double n) {
    check(x >= 0.0, "hoeffding_H: x must be nonnegative");
    check(v > 0.0 && n > 0.0, "hoeffding_H: v and n must be positive");
    if (x > n) return 0.0;
    double v2 = v * v;
    double t1 = (x + v2) * std::log(v2 / (x + v2));
    double t2 = x < n ? (n - x) * std::log(n / (n - x)) : 0.0;  // (+inf)^0 = 1 at x = n
    return std::exp(n / (n + v2) * (t1 + t2));
}

double bennett_B(double x, double v) {
    check(x >= 0.0 && v > 0.0, "bennett_B: x >= 0 and v > 0 required");
    double v2 = v * v;
    return std::exp((x + v2) * std::log(v2 / (x + v2)) + x);
}

double bernstein_B1(double x, double v) {
    check(x >= 0.0 && v > 0.0, "bernstein_B1: x >= 0 and v > 0 required");
    return std::exp(-x * x / (2.0 * (v * v + x / 3.0)));
}

BoundEnvelope BoundEnvelope::from_log_body(BoundKind kind, std::string tag, int d, double p,
                                           long n, double K1n, InitialTailSpec init,
                                           BoundConstants bc,
                                           std::function<double(double)> log_martingale) {
    check(d >= 1, "envelope: dimension must be at least 1");
    check(p >= 1.0, "envelope: norm index must be at least 1");
    BoundEnvelope e;
    e.kind_ = kind;
    e.tag_ = std::move(tag);
    e.d_ = d;
    e.p_ = p;
    e.n_ = n;
    e.K1n_ = K1n;
    e.init_ = init;
    e.constants_ = bc;
    e.log_martingale_ = std::move(log_martingale);
    return e;
}

EnvelopeValue BoundEnvelope::eval_detail(double u) const {
    EnvelopeValue v;
    if (kind_ == BoundKind::Custom) {
        v.martingale = std::min(1.0, std::max(0.0, log_martingale_(u)));
        v.total = v.martingale;
        return v;
    }
    double x = u / d_to_inv_p(d_, p_);
    if (!(x > 0.0)) {
        v.total = v.i1 = v.martingale = 1.0;
        return v;
    }
    double raw_i1 = i1_term(x, K1n_, d_, init_);
    v.i1 = std::min(1.0, std::max(0.0, raw_i1));
    double lm = log_martingale_(x);
    double mart = 0.0;
    if (lm == kNegInf) {
        mart = 0.0;
    } else if (lm < kLogTiny) {
        mart = 0.0;
        v.underflow = true;
    } else {
        mart = std::exp(std::min(lm, 10.0));
    }
    v.martingale = std::min(1.0, mart);
    v.total = std::min(1.0, v.i1 + mart);
    return v;
}

BoundEnvelope bernstein_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                 const InitialTailSpec& init, BernsteinForm form, long n) {
    check(bc.kind == BoundKind::Bernstein, "bernstein_envelope: wrong constants kind");
    double V2 = bc.V2, delta = bc.delta;
    auto body = [V2, delta, d, form](double x) {
        double denom;
        if (form == BernsteinForm::Refined) {
            // V^2 (1 + sqrt(1 + x delta / V^2)) + delta x / 2, continuous at V^2 = 0.
            denom = V2 > 0.0 ? V2 + std::sqrt(V2 * V2 + x * delta * V2) + delta * x / 2.0
                             : delta * x / 2.0;
        } else {
            denom = 2.0 * V2 + delta * x;
        }
        if (denom <= 0.0) return kNegInf;
        return std::log(2.0 * d) - (x / 2.0) * (x / 2.0) / denom;
    };
    std::string tag = form == BernsteinForm::Refined ? "bernstein" : "bernstein_relaxed";
    return BoundEnvelope::from_log_body(BoundKind::Bernstein, tag, d, p, n, K1n, init, bc, body);
}

std::optional<BoundEnvelope> semiexp_envelope(const BoundConstants& bc, int d, double p,
                                              double K1n, const InitialTailSpec& init, long n) {
    check(bc.kind == BoundKind::SemiExp, "semiexp_envelope: wrong constants kind");
    if (std::sqrt(bc.V2) < 1.0) return std::nullopt;  // bound only valid for V_n >= 1
    double V2 = bc.V2, delta = bc.delta, q = bc.q;
    auto body = [V2, delta, q, d](double x) {
        double h = x / 2.0;
        double denom = 2.0 * (V2 + std::pow(h, 2.0 - q) * std::pow(delta, q));
        if (denom <= 0.0) return kNegInf;
        return std::log(4.0 * d) - h * h / denom;
    };
    return BoundEnvelope::from_log_body(BoundKind::SemiExp, q_tag("semiexp", q), d, p, n,
                                        K1n, init, bc, body);
}

BoundEnvelope fuk_nagaev_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                  const InitialTailSpec& init, long n) {
    check(bc.kind == BoundKind::FukNagaev, "fuk_nagaev_envelope: wrong constants kind");
    check(bc.q >= 2.0, "fuk_nagaev_envelope: q must be at least 2");
    double q = bc.q, Hq = bc.Hq, V2 = bc.V2;
    double log_poly_coef =
        Hq > 0.0 ? (q + 1.0) * std::log(2.0) + std::log(static_cast<double>(d)) +
                       q * std::log1p(2.0 / q) + std::log(Hq)
                 : kNegInf;
    double exp_denom = 2.0 * (q + 2.0) * (q + 2.0) * std::exp(q) * V2;
    auto body = [log_poly_coef, exp_denom, q, d](double x) {
        double t1 = log_poly_coef == kNegInf ? kNegInf : log_poly_coef - q * std::log(x);
        double t2 = exp_denom > 0.0 ? std::log(2.0 * d) - x * x / exp_denom : kNegInf;
        return logsumexp2(t1, t2);
    };
    return BoundEnvelope::from_log_body(BoundKind::FukNagaev, q_tag("fuk_nagaev", q), d, p, n,
                                        K1n, init, bc, body);
}

BoundEnvelope vbe_envelope(const BoundConstants& bc, int d, double p, double K1n,
                           const InitialTailSpec& init, long n) {
    check(bc.kind == BoundKind::VBE, "vbe_envelope: wrong constants kind");
    double q = bc.q, Vq = bc.Vq;
    double log_coef = Vq > 0.0 ? q * std::log(2.0) + std::log(static_cast<double>(d)) + std::log(Vq)
                               : kNegInf;
    auto body = [log_coef, q](double x) {
        return log_coef == kNegInf ? kNegInf : log_coef - q * std::log(x);
    };
    return BoundEnvelope::from_log_body(BoundKind::VBE, q_tag("vbe", q), d, p, n, K1n, init,
                                        bc, body);
}

BoundEnvelope weak_envelope(const BoundConstants& bc, int d, double p, double K1n,
                            const InitialTailSpec& init, long n) {
    check(bc.kind == BoundKind::WeakMoment, "weak_envelope: wrong constants kind");
    double q = bc.q;
    double cdq = weak_moment_cdq(d, q);
    double log_coef = bc.Bq > 0.0 ? std::log(cdq) + std::log(bc.Bq) : kNegInf;
    auto body = [log_coef, q](double x) {
        return log_coef == kNegInf ? kNegInf : log_coef - q * std::log(x);
    };
    return BoundEnvelope::from_log_body(BoundKind::WeakMoment, q_tag("weak", q), d, p, n,
                                        K1n, init, bc, body);
}

BoundEnvelope mcdiarmid_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                 const InitialTailSpec& init, McDiarmidForm form, long n) {
    check(bc.kind == BoundKind::McDiarmid, "mcdiarmid_envelope: wrong constants kind");
    check(init.kind == InitialTailSpec::Kind::Deterministic ||
              init.kind == InitialTailSpec::Kind::BoundedDiameter,
          "mcdiarmid_envelope: initial state must have bounded diameter");
    double D = bc.D, V2 = bc.V2;
    auto body = [D, V2, d, form](double x) {
        // |S_{2,n}^{(i)}| <= D_n path-wise, so the martingale term vanishes
        // beyond x = 2 D_n.
        if (D <= 0.0 || x >= 2.0 * D) return kNegInf;
        switch (form) {
            case McDiarmidForm::Rio: {
                double ls = ell_star(x / (2.0 * D));
                return std::log(2.0 * d) - D * D / V2 * ls;
            }
            case McDiarmidForm::Product: {
                double expo = (D * x - (x / 2.0) * (x / 2.0)) / V2;
                return std::log(2.0 * d) + expo * std::log((D - x / 2.0) / D);
            }
            case McDiarmidForm::Gaussian:
                return std::log(2.0 * d) - x * x / (2.0 * V2);
        }
        return kNegInf;
    };
    static const char* names[] = {"mcdiarmid_rio", "mcdiarmid_product", "mcdiarmid_gaussian"};
    return BoundEnvelope::from_log_body(BoundKind::McDiarmid, names[static_cast<int>(form)], d, p,
                                        n, K1n, init, bc, body);
}

BoundEnvelope hoeffding_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                 const InitialTailSpec& init, long n, double y,
                                 std::function<double(double)> tail_G) {
    check(bc.kind == BoundKind::Hoeffding, "hoeffding_envelope: wrong constants kind");
    check(n >= 2, "hoeffding_envelope: horizon n must be at least 2");
    double V = std::sqrt(bc.V2), delta = bc.delta, T = bc.T;
    double nn = static_cast<double>(n);
    long reps = n - 1;  // number of i.i.d. innovations behind the max
    auto term_at = [V, delta, d, nn, reps, tail_G](double x, double yy) {
        if (delta <= 0.0) return 0.0;  // noiseless: martingale part is empty
        double s = (yy + 1.0) * delta;
        double h = 2.0 * d * hoeffding_H(x / (2.0 * s), V / s, nn);
        double tail = 0.0;
        if (tail_G) {
            double p1 = std::min(1.0, std::max(0.0, tail_G(yy)));
            tail = 2.0 * d * (1.0 - std::pow(1.0 - p1, static_cast<double>(reps)));
        }
        return h + tail;
    };
    std::function<double(double)> body;
    if (T > 0.0 && !tail_G) {
        // Bounded case: G_eps <= T a.s., so y = T leaves no residual tail.
        body = [term_at, T](double x) {
            double v = term_at(x, T);
            return v > 0.0 ? std::log(v) : kNegInf;
        };
    } else {
        check(tail_G != nullptr,
              "hoeffding_envelope: unbounded noise requires a tail functional for G_eps");
        if (y > 0.0) {
            body = [term_at, y](double x) {
                double v = term_at(x, y);
                return v > 0.0 ? std::log(v) : kNegInf;
            };
        } else {
            // The inequality holds for every y > 0; minimize over a log grid.
            std::vector<double> grid(64);
            for (int i = 0; i < 64; ++i)
                grid[i] = std::exp(std::log(1e-2) + (std::log(1e4) - std::log(1e-2)) * i / 63.0);
            body = [term_at, grid](double x) {
                double best = std::numeric_limits<double>::infinity();
                for (double yy : grid) best = std::min(best, term_at(x, yy));
                return best > 0.0 ? std::log(best) : kNegInf;
            };
        }
    }
    return BoundEnvelope::from_log_body(BoundKind::Hoeffding, "hoeffding", d, p, n, K1n, init, bc,
                                        body);
}

BoundEnvelope custom_envelope(std::function<double(double)> fn, int d, double p, long n,
                              std::string tag) {
    BoundConstants bc;
    bc.kind = BoundKind::Custom;
    return BoundEnvelope::from_log_body(BoundKind::Custom, std::move(tag), d, p, n, 1.0,
                                        InitialTailSpec::deterministic(), bc, std::move(fn));
}

}  // namespace nhmc

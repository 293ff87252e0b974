#include "nhmc/coefficients.hpp"

#include <cmath>

#include "nhmc/common.hpp"

namespace nhmc {

std::string to_string(BoundKind k) {
    switch (k) {
        case BoundKind::Bernstein: return "bernstein";
        case BoundKind::SemiExp: return "semiexp";
        case BoundKind::FukNagaev: return "fuk_nagaev";
        case BoundKind::VBE: return "vbe";
        case BoundKind::WeakMoment: return "weak";
        case BoundKind::McDiarmid: return "mcdiarmid";
        case BoundKind::Hoeffding: return "hoeffding";
        case BoundKind::MZ: return "mz";
        case BoundKind::VBEMoment: return "vbe_moment";
        case BoundKind::Custom: return "custom";
    }
    return "?";
}

InitialTailSpec InitialTailSpec::exp_tail(double c) {
    check(c > 0.0, "InitialTailSpec: c must be positive");
    return {Kind::ExpTail, c, 0.0, 0.0};
}
InitialTailSpec InitialTailSpec::semi_exp_tail(double c, double q) {
    check(c > 0.0 && q > 0.0, "InitialTailSpec: c, q must be positive");
    return {Kind::SemiExpTail, c, q, 0.0};
}
InitialTailSpec InitialTailSpec::poly_tail(double c, double q) {
    check(c > 0.0 && q > 0.0, "InitialTailSpec: c, q must be positive");
    return {Kind::PolyTail, c, q, 0.0};
}
InitialTailSpec InitialTailSpec::bounded_diameter(double T0) {
    check(T0 >= 0.0, "InitialTailSpec: T0 must be nonnegative");
    return {Kind::BoundedDiameter, 0.0, 0.0, T0};
}

CoefficientTable compute_K(const Schedule& s, long n) {
    check(n >= 2, "compute_K: n must be at least 2");
    CoefficientTable t;
    t.n = n;
    t.K.assign(static_cast<std::size_t>(n) + 1, 0.0);
    t.K[static_cast<std::size_t>(n)] = 1.0;
    for (long k = n - 1; k >= 1; --k)
        t.K[static_cast<std::size_t>(k)] = 1.0 + s.eval(k + 1).rho * t.K[static_cast<std::size_t>(k) + 1];
    return t;
}

BoundConstants constants_bernstein(const CoefficientTable& K, const Schedule& s,
                                   const MomentConstants& mc) {
    check(mc.H1 > 0.0 && mc.A1 > 0.0, "constants_bernstein: H1 and A1 must be set");
    BoundConstants b;
    b.kind = BoundKind::Bernstein;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        double a = 2.0 * K.at(k) * (tau + xi);
        b.V2 += a * a;
        b.delta = std::max(b.delta, 2.0 * K.at(k) * (tau * mc.H1 + xi));
    }
    b.V2 *= 1.0 + mc.A1;
    return b;
}

BoundConstants constants_semiexp(const CoefficientTable& K, const Schedule& s,
                                 const MomentConstants& mc, double q) {
    check(q > 0.0 && q < 1.0, "constants_semiexp: q must lie in (0,1)");
    check(mc.A1_semi > 0.0 && mc.Eexp_q > 0.0,
          "constants_semiexp: A1_semi and Eexp_q must be set");
    BoundConstants b;
    b.kind = BoundKind::SemiExp;
    b.q = q;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        b.V2 += K.at(k) * K.at(k) * (tau * tau * mc.A1_semi + xi * xi * mc.Eexp_q);
        b.delta = std::max(b.delta, std::max(K.at(k) * tau, K.at(k) * xi));
    }
    b.V2 *= 2.0 * std::exp(1.0);
    return b;
}

BoundConstants constants_fuk_nagaev(const CoefficientTable& K, const Schedule& s,
                                    const MomentConstants& mc, double q) {
    check(q >= 2.0, "constants_fuk_nagaev: q must be at least 2");
    check(mc.A1_fn > 0.0 && mc.B1q > 0.0, "constants_fuk_nagaev: A1_fn and B1q must be set");
    BoundConstants b;
    b.kind = BoundKind::FukNagaev;
    b.q = q;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        double Kk = K.at(k);
        b.V2 += Kk * Kk * (tau * tau * mc.A1_fn + xi * xi);
        b.Hq += std::pow(Kk, q) * (std::pow(tau, q) * mc.B1q + std::pow(xi, q));
    }
    b.V2 *= 2.0;
    b.Hq *= std::pow(2.0, q - 1.0);
    return b;
}

BoundConstants constants_vbe(const CoefficientTable& K, const Schedule& s,
                             const MomentConstants& mc, double q) {
    check(q >= 1.0 && q <= 2.0, "constants_vbe: q must lie in [1,2]");
    check(mc.A1q > 0.0, "constants_vbe: A1q must be set");
    BoundConstants b;
    b.kind = BoundKind::VBE;
    b.q = q;
    auto term = [&](long k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        return std::pow(K.at(k), q) * (std::pow(tau, q) * mc.A1q + std::pow(xi, q));
    };
    double sum_tail = 0.0;
    for (long k = 3; k <= K.n; ++k) sum_tail += term(k);
    b.Vq = std::pow(2.0, q - 1.0) * (term(2) + std::pow(2.0, 2.0 - q) * sum_tail);
    return b;
}

BoundConstants constants_weak(const CoefficientTable& K, const Schedule& s,
                              const MomentConstants& mc, double q) {
    check(q > 1.0 && q < 2.0, "constants_weak: q must lie strictly inside (1,2)");
    check(mc.A1q > 0.0, "constants_weak: A1q must be set");
    BoundConstants b;
    b.kind = BoundKind::WeakMoment;
    b.q = q;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        b.Bq += std::pow(2.0 * K.at(k), q) * (std::pow(tau, q) * mc.A1q + std::pow(xi, q));
    }
    return b;
}

double weak_moment_cdq(int d, double q) {
    check(q > 1.0 && q < 2.0, "weak_moment_cdq: q must lie strictly inside (1,2)");
    return std::pow(2.0, 2.0 + q) * d * (q / (q - 1.0) + 2.0 / (2.0 - q));
}

BoundConstants constants_mcdiarmid(const CoefficientTable& K, const Schedule& s,
                                   const MomentConstants& mc) {
    check(mc.T1 > 0.0, "constants_mcdiarmid: T1 must be set");
    BoundConstants b;
    b.kind = BoundKind::McDiarmid;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        double dk = K.at(k) * (tau * mc.T1 + xi);
        b.D += dk;
        b.V2 += dk * dk;
    }
    return b;
}

BoundConstants constants_hoeffding(const CoefficientTable& K, const Schedule& s,
                                   const MomentConstants& mc) {
    check(mc.A1_fn > 0.0, "constants_hoeffding: A1_fn must be set");
    BoundConstants b;
    b.kind = BoundKind::Hoeffding;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        b.V2 += K.at(k) * K.at(k) * (tau * tau * mc.A1_fn + xi * xi);
        b.delta = std::max(b.delta, std::max(K.at(k) * tau, K.at(k) * xi));
    }
    b.V2 *= 2.0;
    b.T = mc.T;
    return b;
}

BoundConstants constants_mz(const CoefficientTable& K, const Schedule& s,
                            const MomentConstants& mc, double q) {
    check(q >= 2.0, "constants_mz: q must be at least 2");
    check(mc.B1q > 0.0, "constants_mz: B1q (noise q-moment) must be set");
    check(mc.B1q_init > 0.0 || mc.init_moment_known,
          "constants_mz: B1q_init must be set (zero only for deterministic X1)");
    BoundConstants b;
    b.kind = BoundKind::MZ;
    b.q = q;
    double sum = 0.0;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        sum += K.at(k) * K.at(k) *
               std::pow(std::pow(tau, q) * mc.B1q + std::pow(xi, q), 2.0 / q);
    }
    b.Tq = K.at(1) * K.at(1) * std::pow(mc.B1q_init, 2.0 / q) +
           (q - 1.0) * std::pow(2.0, 2.0 - 2.0 / q) * sum;
    return b;
}

BoundConstants constants_vbe_moment(const CoefficientTable& K, const Schedule& s,
                                    const MomentConstants& mc, double q) {
    check(q >= 1.0 && q <= 2.0, "constants_vbe_moment: q must lie in [1,2]");
    check(mc.A1q > 0.0, "constants_vbe_moment: A1q (noise q-moment) must be set");
    check(mc.A1q_init > 0.0 || mc.init_moment_known,
          "constants_vbe_moment: A1q_init must be set (zero only for deterministic X1)");
    BoundConstants b;
    b.kind = BoundKind::VBEMoment;
    b.q = q;
    double sum = 0.0;
    for (long k = 2; k <= K.n; ++k) {
        auto [rho, tau, xi] = s.eval(k);
        (void)rho;
        sum += std::pow(K.at(k), q) * (std::pow(tau, q) * mc.A1q + std::pow(xi, q));
    }
    b.Vq = std::pow(K.at(1), q) * mc.A1q_init + 2.0 * sum;
    return b;
}

AsymptoticsReport asymptotics_report(const Schedule& s, const std::vector<long>& n_grid) {
    check(s.regime() != Regime::Custom,
          "asymptotics_report: custom schedules need a regime classification first");
    check(!n_grid.empty(), "asymptotics_report: empty horizon grid");
    AsymptoticsReport rep;
    rep.regime = s.regime();
    rep.alpha = s.alpha();
    rep.log_product_ok = true;
    for (long n : n_grid) {
        auto K = compute_K(s, n);
        AsymptoticsRow row{n, 0.0, 0.0, 0.0, K.at(1)};
        for (long k = 2; k <= n; ++k) {
            auto [rho, tau, xi] = s.eval(k);
            (void)rho;
            double ka = std::pow(static_cast<double>(k), s.alpha());
            row.max_K_tau_xi = std::max(row.max_K_tau_xi, K.at(k) * (tau + xi));
            row.max_K_tau_over_ka = std::max(row.max_K_tau_over_ka, K.at(k) * tau / ka);
            row.max_K_tau_times_ka = std::max(row.max_K_tau_times_ka, K.at(k) * tau * ka);
        }
        rep.rows.push_back(row);

        // The log-product estimate follows from rho_n <= 1 - rho/n^alpha,
        // which holds under C15/C16; C17 only caps rho_n by a constant.
        // ln(rho_{k+1}...rho_{k+l}) <= -rho sum_{i=k+1}^{k+l} i^{-alpha}
        //                           <= -rho (l-1) / (k+l)^alpha.
        if (s.regime() == Regime::C15 || s.regime() == Regime::C16) {
            for (long k : {1L, 2L, n / 4 + 1, n / 2 + 1}) {
                for (long l : {1L, 2L, n / 4 + 1, n / 2 + 1}) {
                    if (k + l > n - 1) continue;
                    double lhs = 0.0;
                    for (long i = k + 1; i <= k + l; ++i) {
                        double r = s.eval(i).rho;
                        lhs += (r > 0.0) ? std::log(r) : -1e30;
                    }
                    double a = s.alpha();
                    double rhs = -s.rho_param() * static_cast<double>(l - 1) /
                                 std::pow(static_cast<double>(k + l), a);
                    if (lhs > rhs + 1e-12) {
                        rep.log_product_ok = false;
                        rep.log_product_violations.push_back(
                            "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                            " l=" + std::to_string(l));
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace nhmc

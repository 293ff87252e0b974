#pragma once

#include <string>
#include <vector>

#include "nhmc/schedules.hpp"

namespace nhmc {

// Accumulated contraction weights K_{k,n} = 1 + rho_{k+1} + rho_{k+1}rho_{k+2}
// + ... with K_{n,n} = 1, stored for k = 1..n (index 0 unused).
struct CoefficientTable {
    long n = 0;
    std::vector<double> K;

    double at(long k) const { return K[static_cast<std::size_t>(k)]; }
};

// Computed by the exact backward recurrence K_k = 1 + rho_{k+1} K_{k+1};
// the asymptotic estimates of the regime lemma are verification targets only.
CoefficientTable compute_K(const Schedule& s, long n);

enum class BoundKind {
    Bernstein,
    SemiExp,
    FukNagaev,
    VBE,
    WeakMoment,
    McDiarmid,
    Hoeffding,
    MZ,
    VBEMoment,
    Custom
};

std::string to_string(BoundKind k);

// Per-proposition derived constants. Only the fields relevant to `kind` are
// populated; everything else stays zero.
struct BoundConstants {
    BoundKind kind = BoundKind::Custom;
    double V2 = 0.0;     // V_n^2
    double delta = 0.0;  // delta_n
    double D = 0.0;      // D_n (McDiarmid)
    double Hq = 0.0;     // H_n(q) (Fuk-Nagaev)
    double Vq = 0.0;     // V_n(q)
    double Bq = 0.0;     // B(n,q) (weak moments)
    double Tq = 0.0;     // T_n(q) (Marcinkiewicz-Zygmund)
    double q = 0.0;
    double T = 0.0;      // a.s. bound on G_eps(eps) (Hoeffding bounded case)
};

// Tail hypothesis on the dominating variable of the initial state.
struct InitialTailSpec {
    enum class Kind { Deterministic, ExpTail, SemiExpTail, PolyTail, BoundedDiameter };
    Kind kind = Kind::Deterministic;
    double c = 0.0;   // scale of the tail bound
    double q = 0.0;   // exponent (SemiExpTail / PolyTail)
    double T0 = 0.0;  // esssup d(X_1, X_1') (BoundedDiameter)

    static InitialTailSpec deterministic() { return {}; }
    static InitialTailSpec exp_tail(double c);
    static InitialTailSpec semi_exp_tail(double c, double q);
    static InitialTailSpec poly_tail(double c, double q);
    static InitialTailSpec bounded_diameter(double T0);
};

// Moment hypotheses on the dominating variables, one field per condition.
// Zero means "not certified"; consumers reject missing entries. Constants are
// always inputs here; estimation (and its 3-SE inflation) happens only in the
// model helpers, which set `estimated`.
struct MomentConstants {
    double H1 = 0.0, A1 = 0.0;            // E[G^k] <= k!/2 H1^{k-2} A1
    double A1_semi = 0.0, Eexp_q = 0.0;   // E[G^2 e^{G^q}], E[e^{G^q}]
    double A1_fn = 0.0;                   // E[G^2]
    double B1q = 0.0;                     // E[G^q] of the noise (q >= 2)
    double A1q = 0.0;                     // E[G^q] or weak q-moment of the noise (q in (1,2])
    double B1q_init = 0.0;                // E[G_{X1}^q] (moment bounds, q >= 2)
    double A1q_init = 0.0;                // E[G_{X1}^q] (moment bounds, q in [1,2])
    double T1 = 0.0;                      // esssup delta(eps, eps')
    double T = 0.0;                       // a.s. bound on G_eps(eps)
    double q = 0.0;
    InitialTailSpec init_tail{};
    bool estimated = false;
    bool init_moment_known = false;       // deterministic X1 certifies zero init moments
};

BoundConstants constants_bernstein(const CoefficientTable& K, const Schedule& s,
                                   const MomentConstants& mc);
BoundConstants constants_semiexp(const CoefficientTable& K, const Schedule& s,
                                 const MomentConstants& mc, double q);
BoundConstants constants_fuk_nagaev(const CoefficientTable& K, const Schedule& s,
                                    const MomentConstants& mc, double q);
BoundConstants constants_vbe(const CoefficientTable& K, const Schedule& s,
                             const MomentConstants& mc, double q);
BoundConstants constants_weak(const CoefficientTable& K, const Schedule& s,
                              const MomentConstants& mc, double q);
BoundConstants constants_mcdiarmid(const CoefficientTable& K, const Schedule& s,
                                   const MomentConstants& mc);
BoundConstants constants_hoeffding(const CoefficientTable& K, const Schedule& s,
                                   const MomentConstants& mc);
BoundConstants constants_mz(const CoefficientTable& K, const Schedule& s,
                            const MomentConstants& mc, double q);
BoundConstants constants_vbe_moment(const CoefficientTable& K, const Schedule& s,
                                    const MomentConstants& mc, double q);

// Weak-moment dimensional constant C_{d,q} = 2^{2+q} d (q/(q-1) + 2/(2-q)).
double weak_moment_cdq(int d, double q);

// Growth diagnostics across a horizon grid, matching the regime lemma.
struct AsymptoticsRow {
    long n;
    double max_K_tau_xi;        // max_k K_{k,n}(tau_k + xi_k)
    double max_K_tau_over_ka;   // max_k K_{k,n} tau_k / k^alpha
    double max_K_tau_times_ka;  // max_k K_{k,n} tau_k k^alpha
    double K1n;
};

struct AsymptoticsReport {
    Regime regime;
    double alpha;
    std::vector<AsymptoticsRow> rows;
    bool log_product_ok;  // ln(rho_{k+1}...rho_{k+l}) <= -rho (l-1) / ((1-alpha)^2 (k+l)^alpha)
    std::vector<std::string> log_product_violations;
};

AsymptoticsReport asymptotics_report(const Schedule& s, const std::vector<long>& n_grid);

}  // namespace nhmc

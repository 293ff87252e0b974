#pragma once

#include <functional>
#include <optional>
#include <string>

#include "nhmc/coefficients.hpp"

namespace nhmc {

// One evaluated point of an envelope. `underflow` marks a martingale term
// whose true value is below 1e-300 and was reported as 0.
struct EnvelopeValue {
    double total = 0.0;
    double i1 = 0.0;
    double martingale = 0.0;
    bool underflow = false;
};

// Initial-state tail term I_1(x) for the threshold x (already on the
// d^{1/p}-scaled axis). Unclamped; envelopes clamp the sum.
double i1_term(double x, double K1n, int d, const InitialTailSpec& init);

// Rio's function ell(t) = (t - ln t - 1) + t/(e^t - 1) + ln(1 - e^{-t}) and
// its Young transform ell*(x) = sup_{t>0} (xt - ell(t)).
double ell(double t);
double ell_star_numeric(double x);  // raw one-dimensional maximization
double ell_star(double x);          // floored by (x^2-2x) ln(1-x); +inf for x >= 1

// The two-parameter Hoeffding function
//   H_n(x,v) = {(v^2/(x+v^2))^{x+v^2} (n/(n-x))^{n-x}}^{n/(n+v^2)} 1{x<=n},
// with the convention (+inf)^0 = 1 at x = n. Computed in log space.
double hoeffding_H(double x, double v, double n);
double bennett_B(double x, double v);     // (v^2/(x+v^2))^{x+v^2} e^x
double bernstein_B1(double x, double v);  // exp{-x^2 / (2(v^2 + x/3))}

enum class BernsteinForm { Refined, Relaxed };
enum class McDiarmidForm { Rio, Product, Gaussian };

// Callable tail bound u -> bound on P(||S_n||_p >= u). Immutable and pure;
// eval clamps to [0,1] and converts internally to x = u d^{-1/p}.
class BoundEnvelope {
public:
    BoundKind kind() const { return kind_; }
    const std::string& tag() const { return tag_; }
    int d() const { return d_; }
    double p() const { return p_; }
    long n() const { return n_; }
    double K1n() const { return K1n_; }
    const BoundConstants& constants() const { return constants_; }
    const InitialTailSpec& init() const { return init_; }

    double eval(double u) const { return eval_detail(u).total; }
    EnvelopeValue eval_detail(double u) const;

    // Martingale part on the x scale, as log; -inf means exactly zero.
    // Exposed so builders compose; not part of the bound contract.
    static BoundEnvelope from_log_body(BoundKind kind, std::string tag, int d, double p, long n,
                                       double K1n, InitialTailSpec init, BoundConstants bc,
                                       std::function<double(double)> log_martingale);

private:
    BoundKind kind_ = BoundKind::Custom;
    std::string tag_;
    int d_ = 1;
    double p_ = 2.0;
    long n_ = 0;
    double K1n_ = 1.0;
    InitialTailSpec init_{};
    BoundConstants constants_{};
    std::function<double(double)> log_martingale_;
};

BoundEnvelope bernstein_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                 const InitialTailSpec& init,
                                 BernsteinForm form = BernsteinForm::Refined, long n = 0);

// Requires V_n >= 1; refuses (nullopt) otherwise rather than emitting an
// unproven bound.
std::optional<BoundEnvelope> semiexp_envelope(const BoundConstants& bc, int d, double p,
                                              double K1n, const InitialTailSpec& init, long n = 0);

BoundEnvelope fuk_nagaev_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                  const InitialTailSpec& init, long n = 0);

BoundEnvelope vbe_envelope(const BoundConstants& bc, int d, double p, double K1n,
                           const InitialTailSpec& init, long n = 0);

BoundEnvelope weak_envelope(const BoundConstants& bc, int d, double p, double K1n,
                            const InitialTailSpec& init, long n = 0);

// init must be Deterministic or BoundedDiameter. For x > 2 D_n the martingale
// part has range <= D_n, so only I_1 remains.
BoundEnvelope mcdiarmid_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                 const InitialTailSpec& init,
                                 McDiarmidForm form = McDiarmidForm::Rio, long n = 0);

// Bounded case (G_eps <= T a.s.): y = T and no residual tail term. General
// case: tail_G(y) = P(G_eps(eps) > y) must be supplied; y is either fixed or,
// when y <= 0, auto-selected by minimizing over a 64-point log grid.
BoundEnvelope hoeffding_envelope(const BoundConstants& bc, int d, double p, double K1n,
                                 const InitialTailSpec& init, long n, double y = 0.0,
                                 std::function<double(double)> tail_G = nullptr);

// Arbitrary callable bound; used for negative-control fixtures.
BoundEnvelope custom_envelope(std::function<double(double)> fn, int d, double p, long n,
                              std::string tag);

}  // namespace nhmc

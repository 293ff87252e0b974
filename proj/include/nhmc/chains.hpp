#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nhmc/coefficients.hpp"
#include "nhmc/common.hpp"
#include "nhmc/rng.hpp"
#include "nhmc/schedules.hpp"

namespace nhmc {

struct NoiseSpec {
    enum class Kind { GaussianIid, UniformPM1, TwoAtom, BoundedUniform };
    Kind kind = Kind::GaussianIid;
    int d = 1;
    double sigma = 1.0;                   // GaussianIid
    double a = 1.0, b = -1.0, pr = 0.5;   // TwoAtom (scalar)
    double lo = -1.0, hi = 1.0;           // BoundedUniform

    static NoiseSpec gaussian(double sigma, int d = 1);
    static NoiseSpec uniform_pm1(int d = 1);
    static NoiseSpec two_atom(double a, double b, double pr);
    static NoiseSpec bounded_uniform(double lo, double hi, int d = 1);

    Vec mean() const;
    bool bounded() const;
    bool finite_atoms() const;
    std::vector<std::pair<Vec, double>> atoms() const;
    Vec sample(rng::Stream& stream) const;
};

struct InitSpec {
    bool deterministic = true;
    Vec x1;
    NoiseSpec dist;
    InitialTailSpec tail{};

    static InitSpec point(Vec x1);
    static InitSpec random(NoiseSpec dist, InitialTailSpec tail);
    Vec sample(rng::Stream& stream) const;
};

enum class Example {
    FunctionalAR,
    UnitRoot,
    LinearSA,
    ProjectedLinearSA,
    LinearSAScaledNoise,
    LinearSAAdditive,
    ProjectedSGD,
    Subsampled
};

std::string to_string(Example e);

struct QuadraticTerm {
    double weight;
    Vec center;
};

// One innovation of the chain. `value` is the continuous part; `batch`
// carries the SGD subsample; `block` the inner draws of a subsampled chain.
struct NoiseDraw {
    Vec value;
    std::vector<int> batch;
    std::vector<Vec> block;
};

struct ChainModel {
    Example example = Example::LinearSA;
    int d = 1;
    double p = 2.0;
    NoiseSpec noise;
    bool has_noise = true;
    InitSpec init;
    Schedule schedule;
    std::string tag;

    // linear family
    Mat A;
    Vec B;
    double gamma = 0.0, alpha = 0.0;
    double lambda_min = 0.0, lambda_max = 0.0;

    // functional auto-regression
    Mat R;
    Vec g0;
    double r_norm = 0.0;

    // unit root
    double c = 0.0;
    bool reciprocal = false;

    // projection radius
    double D_proj = 0.0;

    // finite-sum gradient family
    std::vector<QuadraticTerm> terms;
    int minibatch = 0;
    double m_strong = 0.0, l_lip = 0.0, grad_bound = 0.0;

    // subsampled chain
    std::shared_ptr<const ChainModel> inner;
    std::vector<long> gaps;
};

// Model constructors; each validates its parameter constraints and attaches
// the implied coefficient schedule with its regime classification.
ChainModel make_functional_ar(const Mat& R, const Vec& g0, const NoiseSpec& noise,
                              const InitSpec& init, double p);
ChainModel make_unit_root(double c, double alpha, bool reciprocal, const NoiseSpec& noise,
                          const InitSpec& init);
ChainModel make_linear_sa(const Mat& A, const Vec& B, double gamma, double alpha,
                          const NoiseSpec& noise, const InitSpec& init, double p);
ChainModel make_projected_linear_sa(const Mat& A, const Vec& B, double gamma, double alpha,
                                    double D_proj, const NoiseSpec& noise, const InitSpec& init);
ChainModel make_linear_sa_scaled_noise(const Mat& A, const Vec& B, double gamma, double alpha,
                                       const NoiseSpec& noise, const InitSpec& init, double p);
ChainModel make_linear_sa_additive(const Mat& A, const Vec& B, double gamma, double alpha,
                                   const NoiseSpec& noise, const InitSpec& init, double p);
// eta = nullopt gives plain projected SGD; a noise spec adds the Langevin
// perturbation.
ChainModel make_projected_sgd(const std::vector<QuadraticTerm>& terms, int minibatch,
                              double D_proj, double gamma, double alpha,
                              const std::optional<NoiseSpec>& eta, const InitSpec& init);
ChainModel make_subsampled(ChainModel inner, const std::vector<long>& gaps);

NoiseDraw sample_noise(const ChainModel& m, long n, rng::Stream& stream);
Vec apply_step(const ChainModel& m, long n, const Vec& x, const NoiseDraw& draw);
Vec step(const ChainModel& m, long n, const Vec& x, rng::Stream& stream);

// X_1..X_n; deterministic given (model, n, seed).
std::vector<Vec> simulate(const ChainModel& m, long n, std::uint64_t seed);
std::vector<Vec> simulate(const ChainModel& m, long n, rng::Stream& stream);

// Distance between two innovations in the metric the schedule's tau refers to.
double noise_delta(const ChainModel& m, const NoiseDraw& y, const NoiseDraw& yp);

// Mean distance of y to an independent innovation. Closed form where
// available, otherwise Monte-Carlo over 10^6 draws (standard error written to
// se_out when given).
double g_eps(const ChainModel& m, const Vec& y, double* se_out = nullptr);
double g_x1(const ChainModel& m, const Vec& x, double* se_out = nullptr);

// P(G_eps(eps) > t); scalar noise only.
double g_eps_tail(const ChainModel& m, double t);

// Valid moment constants for the requested bound kind. Closed forms where the
// noise law allows; Monte-Carlo estimates are inflated by three standard
// errors and flagged `estimated`.
MomentConstants derive_constants(const ChainModel& m, BoundKind which, double q = 0.0);

struct ContractionProbe {
    Vec x, xp;
    double mean_ratio = 0.0, se = 0.0, rho_n = 0.0;
    bool ok = false;
};

struct ContractionReport {
    long n = 0;
    std::vector<ContractionProbe> probes;
    double max_c2_residual = 0.0;  // sup of d(F(x,y), F(x,y')) - tau_n delta(y,y')
    double xi_n = 0.0;
    bool c2_ok = false;
    bool ok = false;
    std::vector<std::string> violations;
};

ContractionReport verify_contraction(const ChainModel& m, long n, long N, std::uint64_t seed,
                                     std::vector<std::pair<Vec, Vec>> probes = {});

// Exact E X_1..E X_n for the affine models (nullopt otherwise).
std::optional<std::vector<Vec>> exact_mean_trajectory(const ChainModel& m, long n);

Vec project_ball(const Vec& x, double radius);

}  // namespace nhmc

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nhmc {

// The three decay regimes for the coefficient sequences (rho_n, tau_n, xi_n),
// plus fully explicit per-n sequences.
enum class Regime { C15, C16, C17, Custom };

std::string to_string(Regime r);

struct ScheduleTriple {
    double rho, tau, xi;
};

// Explicit sequences indexed from n = 2 (element 0 holds the n = 2 value).
struct CustomSequences {
    std::vector<double> rho, tau, xi;
};

// Coefficient schedule of a chain: rho_n in [0,1), tau_n >= 0, xi_n >= 0 for
// every n >= 2. Canonical (non-custom) schedules take the regime inequalities
// with equality; 1 - rho/n^alpha is clamped at 0 from below.
class Schedule {
public:
    Regime regime() const { return regime_; }
    double alpha() const { return alpha_; }
    double rho_param() const { return rho_; }
    double eta_param() const { return eta_; }
    bool has_custom() const { return custom_.has_value(); }
    bool has_formula() const { return static_cast<bool>(formula_); }
    // Largest n an explicit-sequence schedule can be evaluated at (infinite
    // horizon for canonical schedules).
    long max_n() const;

    ScheduleTriple eval(long n) const;

    friend Schedule make_schedule(Regime, double, double, double,
                                  std::optional<CustomSequences>);
    friend Schedule make_formula_schedule(Regime, double, double, double,
                                          std::function<ScheduleTriple(long)>);

private:
    Regime regime_ = Regime::Custom;
    double alpha_ = 0.0, rho_ = 0.0, eta_ = 0.0;
    std::optional<CustomSequences> custom_;
    std::function<ScheduleTriple(long)> formula_;
};

// regime = Custom requires explicit sequences; alpha/rho/eta are ignored.
// A classified regime with explicit sequences validates every term against
// the regime inequalities and keeps the classification.
Schedule make_schedule(Regime regime, double alpha, double rho, double eta,
                       std::optional<CustomSequences> custom = std::nullopt);

// Schedule generated by a per-n formula (the model-implied sequences); every
// evaluated triple is validated against the claimed regime classification.
Schedule make_formula_schedule(Regime classified, double alpha, double rho, double eta,
                               std::function<ScheduleTriple(long)> gen);

// [schedule] section text for canonical and explicit-sequence schedules.
// Model-implied formula schedules are serialized by their [model] section.
std::string to_config(const Schedule& s);

inline ScheduleTriple eval_schedule(const Schedule& s, long n) { return s.eval(n); }

}  // namespace nhmc

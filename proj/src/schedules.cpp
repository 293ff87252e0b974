#include "nhmc/schedules.hpp"

#include <cmath>
#include <limits>

#include "nhmc/common.hpp"

namespace nhmc {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::C15: return "C15";
        case Regime::C16: return "C16";
        case Regime::C17: return "C17";
        case Regime::Custom: return "custom";
    }
    return "?";
}

namespace {

void validate_params(Regime regime, double alpha, double rho, double eta) {
    switch (regime) {
        case Regime::C15:
            check(alpha >= 0.0 && alpha < 1.0, "make_schedule: C15 requires alpha in [0,1)");
            break;
        case Regime::C16:
            check(alpha > 0.0 && alpha < 1.0, "make_schedule: C16 requires alpha in (0,1)");
            break;
        case Regime::C17:
            check(alpha > 0.0 && alpha <= 1.0, "make_schedule: C17 requires alpha in (0,1]");
            break;
        case Regime::Custom:
            return;
    }
    check(rho > 0.0 && rho < 1.0, "make_schedule: rho must lie in (0,1)");
    check(eta > 0.0, "make_schedule: eta must be positive");
}

ScheduleTriple canonical_triple(Regime regime, double alpha, double rho, double eta, long n) {
    double na = std::pow(static_cast<double>(n), alpha);
    switch (regime) {
        case Regime::C15:
            return {std::max(1.0 - rho / na, 0.0), eta / na, eta / na};
        case Regime::C16:
            return {std::max(1.0 - rho / na, 0.0), eta, eta};
        case Regime::C17:
            return {rho, eta / na, eta / na};
        case Regime::Custom:
            break;
    }
    throw std::logic_error("canonical_triple: custom regime");
}

}  // namespace

long Schedule::max_n() const {
    if (!custom_) return std::numeric_limits<long>::max();
    return static_cast<long>(custom_->rho.size()) + 1;
}

namespace {

void validate_triple_against(Regime regime, double alpha, double rho, double eta, long n,
                             const ScheduleTriple& t, const char* who) {
    check(t.rho >= 0.0 && t.rho < 1.0,
          std::string(who) + ": rho_n must lie in [0,1) at n=" + std::to_string(n));
    check(t.tau >= 0.0 && t.xi >= 0.0,
          std::string(who) + ": tau_n, xi_n must be nonnegative at n=" + std::to_string(n));
    if (regime == Regime::Custom) return;
    double na = std::pow(static_cast<double>(n), alpha);
    double tol = 1e-9;
    switch (regime) {
        case Regime::C15:
            check(t.rho <= 1.0 - rho / na + tol && std::max(t.tau, t.xi) <= eta / na + tol,
                  std::string(who) + ": sequence violates C15 at n=" + std::to_string(n));
            break;
        case Regime::C16:
            check(t.rho <= 1.0 - rho / na + tol && std::max(t.tau, t.xi) <= eta + tol,
                  std::string(who) + ": sequence violates C16 at n=" + std::to_string(n));
            break;
        case Regime::C17:
            check(t.rho <= rho + tol && std::max(t.tau, t.xi) <= eta / na + tol,
                  std::string(who) + ": sequence violates C17 at n=" + std::to_string(n));
            break;
        case Regime::Custom:
            break;
    }
}

}  // namespace

ScheduleTriple Schedule::eval(long n) const {
    check(n >= 2, "eval_schedule: the chain recursion starts at n = 2");
    if (formula_) {
        ScheduleTriple t = formula_(n);
        validate_triple_against(regime_, alpha_, rho_, eta_, n, t, "eval_schedule");
        return t;
    }
    if (custom_) {
        check(n <= max_n(), "eval_schedule: n beyond the explicit sequence length");
        std::size_t i = static_cast<std::size_t>(n - 2);
        return {custom_->rho[i], custom_->tau[i], custom_->xi[i]};
    }
    return canonical_triple(regime_, alpha_, rho_, eta_, n);
}

Schedule make_schedule(Regime regime, double alpha, double rho, double eta,
                       std::optional<CustomSequences> custom) {
    validate_params(regime, alpha, rho, eta);
    if (regime == Regime::Custom)
        check(custom.has_value() && !custom->rho.empty(),
              "make_schedule: custom regime requires nonempty explicit sequences");
    Schedule s;
    s.regime_ = regime;
    s.alpha_ = alpha;
    s.rho_ = rho;
    s.eta_ = eta;
    if (custom) {
        check(custom->rho.size() == custom->tau.size() && custom->rho.size() == custom->xi.size(),
              "make_schedule: rho/tau/xi sequences must have equal length");
        check(!custom->rho.empty(), "make_schedule: explicit sequences must be nonempty");
        for (std::size_t i = 0; i < custom->rho.size(); ++i) {
            long n = static_cast<long>(i) + 2;
            double r = custom->rho[i], t = custom->tau[i], x = custom->xi[i];
            check(r >= 0.0 && r < 1.0, "make_schedule: rho_n must lie in [0,1) at n=" + std::to_string(n));
            check(t >= 0.0, "make_schedule: tau_n must be nonnegative at n=" + std::to_string(n));
            check(x >= 0.0, "make_schedule: xi_n must be nonnegative at n=" + std::to_string(n));
            if (regime != Regime::Custom) {
                double na = std::pow(static_cast<double>(n), alpha);
                double tol = 1e-12;
                switch (regime) {
                    case Regime::C15:
                        check(r <= 1.0 - rho / na + tol && std::max(t, x) <= eta / na + tol,
                              "make_schedule: sequence violates C15 at n=" + std::to_string(n));
                        break;
                    case Regime::C16:
                        check(r <= 1.0 - rho / na + tol && std::max(t, x) <= eta + tol,
                              "make_schedule: sequence violates C16 at n=" + std::to_string(n));
                        break;
                    case Regime::C17:
                        check(r <= rho + tol && std::max(t, x) <= eta / na + tol,
                              "make_schedule: sequence violates C17 at n=" + std::to_string(n));
                        break;
                    case Regime::Custom:
                        break;
                }
            }
        }
        s.custom_ = std::move(custom);
    }
    return s;
}

Schedule make_formula_schedule(Regime classified, double alpha, double rho, double eta,
                               std::function<ScheduleTriple(long)> gen) {
    check(static_cast<bool>(gen), "make_formula_schedule: generator required");
    validate_params(classified, alpha, rho, eta);
    Schedule s;
    s.regime_ = classified;
    s.alpha_ = alpha;
    s.rho_ = rho;
    s.eta_ = eta;
    s.formula_ = std::move(gen);
    s.eval(2);  // fail fast on a misclassified formula
    return s;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string seq_line(const char* key, const std::vector<double>& v) {
    std::string out = std::string(key) + " = [";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
    return out + "]\n";
}

}  // namespace

std::string to_config(const Schedule& s) {
    std::string out = "[schedule]\n";
    if (s.has_custom()) {
        out += "regime = custom\n";
        CustomSequences seq;
        for (long n = 2; n <= s.max_n(); ++n) {
            auto t = s.eval(n);
            seq.rho.push_back(t.rho);
            seq.tau.push_back(t.tau);
            seq.xi.push_back(t.xi);
        }
        out += seq_line("rho_seq", seq.rho);
        out += seq_line("tau_seq", seq.tau);
        out += seq_line("xi_seq", seq.xi);
        return out;
    }
    check(!s.has_formula(),
          "to_config: model-implied schedules are serialized by their model section");
    switch (s.regime()) {
        case Regime::C15: out += "regime = c15\n"; break;
        case Regime::C16: out += "regime = c16\n"; break;
        case Regime::C17: out += "regime = c17\n"; break;
        case Regime::Custom: break;
    }
    out += "alpha = " + num(s.alpha()) + "\n";
    out += "rho = " + num(s.rho_param()) + "\n";
    out += "eta = " + num(s.eta_param()) + "\n";
    return out;
}

}  // namespace nhmc

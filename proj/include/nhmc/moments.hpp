#pragma once

#include <cmath>

#include "nhmc/common.hpp"

namespace nhmc {

// E||S_n||_q <= d^{1/q} sqrt(T_n(q)), q >= 2.
inline double mz_moment_bound(double Tq, int d, double q) {
    check(q >= 2.0, "mz_moment_bound: q must be at least 2");
    check(Tq >= 0.0, "mz_moment_bound: Tq must be nonnegative");
    return std::pow(static_cast<double>(d), 1.0 / q) * std::sqrt(Tq);
}

// E||S_n||_q <= (d V_n(q))^{1/q}, q in [1,2].
inline double vbe_moment_bound(double Vq, int d, double q) {
    check(q >= 1.0 && q <= 2.0, "vbe_moment_bound: q must lie in [1,2]");
    check(Vq >= 0.0, "vbe_moment_bound: Vq must be nonnegative");
    return std::pow(d * Vq, 1.0 / q);
}

}  // namespace nhmc

#pragma once

// Test-side oracles, independent of the library's computation paths.

#include <cmath>
#include <vector>

#include "nhmc/chains.hpp"

namespace testsupport {

// K_{k,n} by direct summation of the defining series (forward prefix
// products), not the backward recurrence.
inline double direct_series_K(const nhmc::Schedule& s, long k, long n) {
    double sum = 1.0, prod = 1.0;
    for (long j = k + 1; j <= n; ++j) {
        prod *= s.eval(j).rho;
        sum += prod;
    }
    return sum;
}

// Exact Var(sum_i X_i) for a scalar affine chain X_k = a_k X_{k-1} + b_k + c_k eps_k
// with i.i.d. centered noise: the influence weight of eps_k on the sum is
// c_k (1 + a_{k+1} + a_{k+1} a_{k+2} + ...).
inline double linear_sum_variance(const nhmc::ChainModel& m, long n, double noise_var) {
    std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    for (long k = 2; k <= n; ++k) {
        double na = std::pow(static_cast<double>(k), m.alpha);
        switch (m.example) {
            case nhmc::Example::LinearSA:
                a[static_cast<std::size_t>(k)] = 1.0 - m.gamma * m.A.at(0, 0) / na;
                c[static_cast<std::size_t>(k)] = -m.gamma / na;
                break;
            case nhmc::Example::LinearSAScaledNoise:
                a[static_cast<std::size_t>(k)] = 1.0 - m.gamma * m.A.at(0, 0);
                c[static_cast<std::size_t>(k)] = -m.gamma / na;
                break;
            case nhmc::Example::LinearSAAdditive:
                a[static_cast<std::size_t>(k)] = 1.0 - m.gamma * m.A.at(0, 0) / na;
                c[static_cast<std::size_t>(k)] = -m.gamma;
                break;
            default:
                throw std::invalid_argument("linear_sum_variance: scalar linear family only");
        }
    }
    std::vector<double> w(static_cast<std::size_t>(n) + 2, 0.0);
    w[static_cast<std::size_t>(n)] = 1.0;
    for (long k = n - 1; k >= 2; --k)
        w[static_cast<std::size_t>(k)] = 1.0 + a[static_cast<std::size_t>(k) + 1] * w[static_cast<std::size_t>(k) + 1];
    double var = 0.0;
    for (long k = 2; k <= n; ++k) {
        double cw = c[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k)];
        var += cw * cw * noise_var;
    }
    return var;
}

}  // namespace testsupport

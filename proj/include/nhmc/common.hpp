#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhmc {

using Vec = std::vector<double>;

inline constexpr double kInfP = std::numeric_limits<double>::infinity();

// L^p norm on R^d, p in [1, inf].
inline double lp_norm(std::span<const double> v, double p) {
    if (v.empty()) return 0.0;
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::fabs(x));
        return m;
    }
    if (p == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::fabs(x);
        return s;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::fabs(x), p);
    return std::pow(s, 1.0 / p);
}

inline double lp_norm(const Vec& v, double p) {
    return lp_norm(std::span<const double>(v.data(), v.size()), p);
}

// d^{1/p}, the factor relating the threshold scales u = d^{1/p} x.
inline double d_to_inv_p(int d, double p) {
    if (std::isinf(p)) return 1.0;
    return std::pow(static_cast<double>(d), 1.0 / p);
}

inline void check(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

// Dense symmetric matrix, row-major.
struct Mat {
    int n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int dim, double diag = 0.0) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {
        for (int i = 0; i < dim; ++i) at(i, i) = diag;
    }
    static Mat scalar(double v) {
        Mat m(1);
        m.at(0, 0) = v;
        return m;
    }
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    bool symmetric(double tol = 1e-12) const {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::fabs(at(i, j) - at(j, i)) > tol * (1.0 + std::fabs(at(i, j)))) return false;
        return true;
    }

    Vec mul(const Vec& x) const {
        Vec y(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
};

// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps.
std::vector<double> jacobi_eigenvalues(const Mat& m);

// Solve A x = b for symmetric positive-definite A (small d).
Vec solve_spd(const Mat& a, const Vec& b);

// lambda_min / lambda_max of the operator norm family used by the models:
// exact |a| for 1x1, symmetric eigen-decomposition for p = 2.
double lambda_min_p(const Mat& a, double p);
double lambda_max_p(const Mat& a, double p);

}  // namespace nhmc

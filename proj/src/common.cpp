#include "nhmc/common.hpp"

#include <algorithm>

namespace nhmc {

std::vector<double> jacobi_eigenvalues(const Mat& m) {
    check(m.n >= 1, "jacobi_eigenvalues: empty matrix");
    check(m.symmetric(1e-9), "jacobi_eigenvalues: matrix must be symmetric");
    const int n = m.n;
    Mat a = m;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a.at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

Vec solve_spd(const Mat& a, const Vec& b) {
    check(a.n == static_cast<int>(b.size()), "solve_spd: dimension mismatch");
    const int n = a.n;
    // Gaussian elimination with partial pivoting; d is small here.
    Mat w = a;
    Vec x = b;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(w.at(r, col)) > std::fabs(w.at(best, col))) best = r;
        check(std::fabs(w.at(best, col)) > 1e-300, "solve_spd: singular matrix");
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(w.at(best, j), w.at(col, j));
            std::swap(x[best], x[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = w.at(r, col) / w.at(col, col);
            for (int j = col; j < n; ++j) w.at(r, j) -= f * w.at(col, j);
            x[r] -= f * x[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = x[r];
        for (int j = r + 1; j < n; ++j) s -= w.at(r, j) * x[j];
        x[r] = s / w.at(r, r);
    }
    return x;
}

double lambda_min_p(const Mat& a, double p) {
    if (a.n == 1) return std::fabs(a.at(0, 0));
    check(p == 2.0, "lambda_min_p: matrix norms supported for p = 2 only");
    auto ev = jacobi_eigenvalues(a);
    check(ev.front() > 0.0, "lambda_min_p: matrix must be positive-definite");
    return ev.front();
}

double lambda_max_p(const Mat& a, double p) {
    if (a.n == 1) return std::fabs(a.at(0, 0));
    check(p == 2.0, "lambda_max_p: matrix norms supported for p = 2 only");
    auto ev = jacobi_eigenvalues(a);
    return std::max(std::fabs(ev.front()), std::fabs(ev.back()));
}

}  // namespace nhmc

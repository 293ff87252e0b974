#include "nhmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nhmc::stats {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double inc_beta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        int m2 = 2 * m;
        double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("reg_inc_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * inc_beta_cf(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                     inc_beta_cf(1.0 - x, b, a) / b;
}

double inc_beta_inv(double p, double a, double b) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    double x = a / (a + b);
    for (int it = 0; it < 200; ++it) {
        double f = reg_inc_beta(x, a, b) - p;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        // Newton step with bisection fallback.
        double logpdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
        double step = f / std::exp(logpdf);
        double nx = x - step;
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::fabs(nx - x) < 1e-15 * (1.0 + std::fabs(x))) return nx;
        x = nx;
    }
    return x;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("normal_quantile: u must be in (0,1)");
    // Acklam's rational approximation, then one Halley refinement with erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (u < plow) {
        double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        double q = u - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double e = normal_cdf(x) - u;
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    double w = e / pdf;
    return x - w / (1.0 + 0.5 * x * w);
}

double clopper_pearson_lower(long k, long n, double conf) {
    if (k <= 0) return 0.0;
    if (k >= n) return std::pow(1.0 - conf, 1.0 / n);
    return inc_beta_inv(1.0 - conf, static_cast<double>(k), static_cast<double>(n - k + 1));
}

double clopper_pearson_upper(long k, long n, double conf) {
    if (k >= n) return 1.0;
    if (k <= 0) return 1.0 - std::pow(1.0 - conf, 1.0 / n);
    return inc_beta_inv(conf, static_cast<double>(k + 1), static_cast<double>(n - k));
}

double pairwise_sum(std::span<const double> v) {
    if (v.empty()) return 0.0;
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("regression_slope: need two equal-length samples");
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

double quantile(std::span<const double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile: empty sample");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    double pos = q * static_cast<double>(s.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= s.size()) return s.back();
    double frac = pos - static_cast<double>(i);
    return s[i] * (1.0 - frac) + s[i + 1] * frac;
}

double median(std::span<const double> v) { return quantile(v, 0.5); }

}  // namespace nhmc::stats

namespace nhmc::rng {
double normal_quantile(double u) { return nhmc::stats::normal_quantile(u); }
}  // namespace nhmc::rng

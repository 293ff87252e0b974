// Timing comparison of the OpenMP replication kernels against the serial
// reference implementations kept for testing.

#include <chrono>
#include <cstdio>

#include "nhmc/montecarlo.hpp"
#include "nhmc/parallel.hpp"

using namespace nhmc;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    long n = argc > 1 ? std::atol(argv[1]) : 400;
    long N = argc > 2 ? std::atol(argv[2]) : 20000;
    auto model = make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.25, NoiseSpec::gaussian(1.0),
                                InitSpec::point(Vec{0.0}), 2.0);
    auto f = FunctionalSpec::sum_of_states();
    Vec center{0.0};
    const std::uint64_t seed = 42;

    std::printf("replication kernel: n=%ld steps, N=%ld replications, %d threads available\n", n,
                N, hardware_threads());

    auto t0 = std::chrono::steady_clock::now();
    auto serial = replicate_norms_serial(model, f, n, N, seed, center);
    double ts = seconds_since(t0);
    std::printf("  serial reference: %8.3fs (%.2f Mstep/s)\n", ts, n * N / ts / 1e6);

    t0 = std::chrono::steady_clock::now();
    auto parallel = replicate_norms(model, f, n, N, seed, center, 0);
    double tp = seconds_since(t0);
    std::printf("  openmp kernel:    %8.3fs (%.2f Mstep/s), speedup %.2fx\n", tp,
                n * N / tp / 1e6, ts / tp);

    bool identical = serial == parallel;
    std::printf("  results identical: %s\n", identical ? "yes" : "NO");

    auto exact_model = make_linear_sa(Mat::scalar(1.0), Vec{0.0}, 0.5, 0.0,
                                      NoiseSpec::two_atom(1.0, -1.0, 0.5),
                                      InitSpec::point(Vec{0.0}), 2.0);
    t0 = std::chrono::steady_clock::now();
    auto tail1 = enumerate_exact_tail(exact_model, f, 18, {}, 1);
    double te1 = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    auto tailp = enumerate_exact_tail(exact_model, f, 18, {}, 0);
    double tep = seconds_since(t0);
    bool same = tail1.p_hat == tailp.p_hat;
    std::printf("path enumeration (2^17 paths): serial %.3fs, openmp %.3fs, identical: %s\n", te1,
                tep, same ? "yes" : "NO");
    return identical && same ? 0 : 1;
}

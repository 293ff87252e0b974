#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nhmc {

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// OpenMP kernel driver. fn(i) must write only to slot i of preallocated
// output, so the result is identical for every thread count. Exceptions
// thrown by fn are collected and rethrown after the region ends.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
    std::exception_ptr err = nullptr;
#ifdef _OPENMP
    if (threads != 1 && n > 1) {
        if (threads <= 0) threads = hardware_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                fn(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        return;
    }
#else
    (void)threads;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

// Serial reference driver, kept as the comparison baseline for tests and the
// benchmark target.
template <class F>
void serial_for(std::size_t n, F&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace nhmc

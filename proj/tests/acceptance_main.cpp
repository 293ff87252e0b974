// Runs every verification criterion and prints one PASS/FAIL line each.
// Exit status is the number of failing criteria.

#include <cstdio>
#include <cstdlib>

#include "nhmc/selftest.hpp"

int main(int argc, char** argv) {
    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    auto results = nhmc::selftest::run_acceptance(0, only);
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s  criterion %2d  %-30s (%6.2fs)  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.runtime_s, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    return failures;
}

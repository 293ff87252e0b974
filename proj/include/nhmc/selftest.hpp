#pragma once

#include <string>
#include <vector>

namespace nhmc::selftest {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double runtime_s = 0.0;
    std::string detail;
};

// Runs the full verification suite with its built-in seeds and pinned
// tolerances. `only` restricts to one criterion id (0 = all).
std::vector<CriterionResult> run_acceptance(int threads, int only = 0);

}  // namespace nhmc::selftest

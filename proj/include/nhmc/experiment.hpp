#pragma once

#include <optional>
#include <string>

#include "nhmc/chains.hpp"
#include "nhmc/config.hpp"

namespace nhmc {

struct RunOptions {
    std::string subcommand;
    std::string out_dir = "out";
    int threads = 0;  // 0 = library default
    std::optional<std::uint64_t> seed_override;
};

// Builds a model from the [model] section.
ChainModel model_from_config(const Config& cfg);

// Schedule from [schedule], or the model-implied one when absent.
Schedule schedule_from_config(const Config& cfg);

// Runs one subcommand: coeffs | bound | verify | moments | sa | erm | selftest.
// Writes CSV tables and summary.json under opts.out_dir. Returns the exit
// status: 0 iff every verdict passed.
int run_experiment(const Config& cfg, const RunOptions& opts);

}  // namespace nhmc

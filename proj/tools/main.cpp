#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhmc/config.hpp"
#include "nhmc/experiment.hpp"
#include "nhmc/parallel.hpp"
#include "nhmc/selftest.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

int run_selftest(const std::string& out_dir, int threads, int only) {
    auto results = nhmc::selftest::run_acceptance(threads, only);
    nlohmann::json verdicts = nlohmann::json::array();
    int failures = 0;
    double total = 0.0;
    for (const auto& r : results) {
        std::printf("%s  criterion %2d  %-30s (%6.2fs)  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.runtime_s, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
        total += r.runtime_s;
        verdicts.push_back({{"name", "criterion_" + std::to_string(r.id) + "_" + r.name},
                            {"pass", r.pass},
                            {"detail", r.detail},
                            {"runtime_s", r.runtime_s}});
    }
    std::printf("%d/%zu criteria passed (%.1fs)\n", static_cast<int>(results.size()) - failures,
                results.size(), total);
    std::filesystem::create_directories(out_dir);
    nlohmann::json summary{{"subcommand", "selftest"},
                           {"verdicts", verdicts},
                           {"timings", {{"total_s", total}}}};
    std::ofstream(out_dir + "/summary.json") << summary.dump(2) << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-homogeneous contractive chain simulator and tail-bound verifier"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int criterion = 0;
    app.add_option("--config", config_path, "experiment config file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = all available)");
    app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
        seed_set = true;
    });

    for (const char* name : {"coeffs", "bound", "verify", "moments", "sa", "erm"})
        app.add_subcommand(name)->fallthrough();
    auto* st = app.add_subcommand("selftest");
    st->fallthrough();
    st->add_option("--criterion", criterion, "run a single criterion (1-10)");

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    std::string sub = app.get_subcommands().front()->get_name();
    try {
        if (sub == "selftest") return run_selftest(out_dir, threads, criterion);
        nhmc::Config cfg;
        if (!config_path.empty()) cfg = nhmc::Config::parse_file(config_path);
        nhmc::RunOptions opts;
        opts.subcommand = sub;
        opts.out_dir = out_dir;
        opts.threads = threads;
        if (seed_set) opts.seed_override = seed;
        return nhmc::run_experiment(cfg, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

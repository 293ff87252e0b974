#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nhmc/experiment.hpp"

using namespace nhmc;

namespace {

Config parse_text(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in, "test.toml");
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("config parsing") {
    auto cfg = parse_text(
        "# comment\n"
        "[run]\n"
        "n = 12\n"
        "mode = \"exact\"  # inline comment\n"
        "u_grid = [0.5, 1.5, 2.5]\n"
        "[model]\n"
        "example = linear_sa\n"
        "gamma = 0.5\n");
    CHECK(cfg.get_long("run", "n") == 12);
    CHECK(cfg.get_str("run", "mode") == "exact");
    CHECK(cfg.get_list("run", "u_grid") == std::vector<double>{0.5, 1.5, 2.5});
    CHECK(cfg.get_double_or("model", "alpha", 0.25) == 0.25);
    CHECK(!cfg.has("bounds", "kinds"));
    CHECK_THROWS_WITH_AS(cfg.get_str("run", "missing"), doctest::Contains("[run] missing"),
                         std::invalid_argument);
}

TEST_CASE("parse errors carry the line number") {
    CHECK_THROWS_WITH_AS(parse_text("[run]\nn = 1\noops\n"), doctest::Contains("test.toml:3"),
                         std::invalid_argument);
    CHECK_THROWS(parse_text("[run\nn = 1\n"));
    CHECK_THROWS(parse_text("[run]\n= 3\n"));
    CHECK_THROWS_WITH_AS(parse_text("[run]\nn = x2\n").get_long("run", "n"),
                         doctest::Contains("not a number"), std::invalid_argument);
}

TEST_CASE("models and schedules from config") {
    auto cfg = parse_text(
        "[model]\n"
        "example = linear_sa\n"
        "a = 1.0\n"
        "b = 0.0\n"
        "gamma = 0.5\n"
        "alpha = 0.25\n"
        "noise = gaussian\n"
        "sigma = 1.0\n"
        "x1 = 0.0\n");
    auto m = model_from_config(cfg);
    CHECK(m.example == Example::LinearSA);
    CHECK(m.schedule.eval(16).rho == doctest::Approx(0.75));

    auto bad = parse_text("[model]\nexample = nope\n");
    CHECK_THROWS_WITH_AS(model_from_config(bad), doctest::Contains("unknown model example"),
                         std::invalid_argument);

    auto sched = parse_text(
        "[schedule]\n"
        "regime = c16\n"
        "alpha = 0.25\n"
        "rho = 0.5\n"
        "eta = 1.0\n");
    CHECK(schedule_from_config(sched).eval(16).rho == doctest::Approx(0.75));

    auto custom = parse_text(
        "[schedule]\n"
        "regime = custom\n"
        "rho_seq = [0.5, 0.5]\n"
        "tau_seq = [1.0, 1.0]\n"
        "xi_seq = [0.0, 0.0]\n");
    CHECK(schedule_from_config(custom).eval(3).rho == doctest::Approx(0.5));
}

TEST_CASE("verify subcommand produces domination verdicts and stable output") {
    std::string dir = (std::filesystem::temp_directory_path() / "nhmc_test_verify").string();
    std::filesystem::remove_all(dir);
    auto cfg = parse_text(
        "[run]\n"
        "n = 8\n"
        "mode = exact\n"
        "[model]\n"
        "example = linear_sa\n"
        "a = 1.0\n"
        "b = 0.0\n"
        "gamma = 0.5\n"
        "alpha = 0.0\n"
        "noise = two_atom\n"
        "atom_a = 1.0\n"
        "atom_b = -1.0\n"
        "atom_pr = 0.5\n"
        "x1 = 0.0\n"
        "[bounds]\n"
        "kinds = [bernstein, mcdiarmid, hoeffding, vbe]\n"
        "vbe_q = [1.5, 2]\n");
    RunOptions opts;
    opts.subcommand = "verify";
    opts.out_dir = dir;
    CHECK(run_experiment(cfg, opts) == 0);
    CHECK(std::filesystem::exists(dir + "/verify.csv"));
    CHECK(std::filesystem::exists(dir + "/summary.json"));

    // re-running is byte-identical apart from the timestamp header line
    auto first = read_lines(dir + "/verify.csv");
    CHECK(run_experiment(cfg, opts) == 0);
    auto second = read_lines(dir + "/verify.csv");
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 1; i < first.size(); ++i) REQUIRE(first[i] == second[i]);

    // the adversarial fixture must flip the exit status
    cfg.set("run", "fixture", "half_exact");
    CHECK(run_experiment(cfg, opts) == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("coeffs subcommand dumps the K table") {
    std::string dir = (std::filesystem::temp_directory_path() / "nhmc_test_coeffs").string();
    std::filesystem::remove_all(dir);
    auto cfg = parse_text(
        "[run]\n"
        "n = 3\n"
        "[schedule]\n"
        "regime = custom\n"
        "rho_seq = [0.5, 0.5]\n"
        "tau_seq = [1.0, 1.0]\n"
        "xi_seq = [0.0, 0.0]\n");
    RunOptions opts;
    opts.subcommand = "coeffs";
    opts.out_dir = dir;
    CHECK(run_experiment(cfg, opts) == 0);
    auto lines = read_lines(dir + "/coeffs.csv");
    REQUIRE(lines.size() == 5);  // timestamp, header, three rows
    CHECK(lines[2].substr(0, 6) == "1,1.75");
    CHECK(lines[3].substr(0, 5) == "2,1.5");
    CHECK(lines[4].substr(0, 3) == "3,1");
    std::filesystem::remove_all(dir);
}

TEST_CASE("unknown subcommand is rejected") {
    RunOptions opts;
    opts.subcommand = "frobnicate";
    opts.out_dir = (std::filesystem::temp_directory_path() / "nhmc_test_x").string();
    CHECK_THROWS(run_experiment(Config{}, opts));
    std::filesystem::remove_all(opts.out_dir);
}

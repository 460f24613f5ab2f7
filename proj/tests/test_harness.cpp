#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedsched/errors.hpp"
#include "fedsched/harness.hpp"

using namespace fedsched;
using nlohmann::json;

namespace {

ExperimentConfig small_config(int clients = 20, int rounds = 30) {
    return parse_config(json{{"system", {{"num_clients", clients}, {"num_rounds", rounds}}},
                             {"pedpc", {{"v", 0.5}}}});
}

ExperimentConfig tiny_config() {
    return parse_config(json{{"system", {{"num_clients", 3}, {"num_rounds", 4}, {"num_frames", 2},
                                         {"min_ratio", 0.05}}},
                             {"scenario", {{"seed", 3}, {"energy_budget_j", 0.03}}}});
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(300.0) == "300");
    CHECK(trace_file_name("PEDPC", 7, 0.001) == "PEDPC_7_0.001.csv");
    CHECK(trace_file_name("Greedy", 1, 1.0) == "Greedy_1_1.csv");
}

TEST_CASE("spearman") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 2, 3}, {5, 5, 5}) == 0.0);
    CHECK(spearman({1, 2, 3, 4, 5}, {0, 0, 1, 2, 3}) == doctest::Approx(0.9746794344808963));
}

TEST_CASE("run_experiment writes one CSV row per round") {
    const auto cfg = small_config();
    const auto dir = std::filesystem::temp_directory_path() / "fedsched_harness_test";
    std::filesystem::remove_all(dir);
    const auto r = run_experiment(cfg, cfg.policy, 5, dir);
    CHECK(r.csv_path.filename() == "PEDPC_5_0.5.csv");
    std::ifstream in(r.csv_path);
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "round,policy,seed,n_selected,latency_s,phi,cost,queue_l2,cum_latency_s,cum_cost,"
          "energy_overflow_j");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 30);
    CHECK(std::filesystem::exists(dir / "PEDPC_5_0.5.json"));

    double cost = 0.0;
    for (const auto& rec : r.trace.records) cost += rec.cost;
    CHECK(r.summary.avg_cost == doctest::Approx(cost / 30).epsilon(1e-12));
    CHECK(r.summary.energy_overflow >= 0.0);
    CHECK(r.summary.drift_violations == 0);

    const auto again = run_experiment(cfg, cfg.policy, 5, dir);
    CHECK(read_file(again.csv_path) == read_file(r.csv_path));
    std::filesystem::remove_all(dir);
}

TEST_CASE("baseline runs") {
    auto cfg = small_config(100, 10);
    PolicySpec all{PolicyKind::SelectAll};
    const auto a = run_experiment(cfg, all, 1, std::nullopt);
    for (const auto& rec : a.trace.records) CHECK(rec.n_selected == 100);
    PolicySpec random{PolicyKind::Random, 0.4};
    CHECK(run_experiment(cfg, random, 1, std::nullopt).summary.avg_selected == 40.0);
}

TEST_CASE("sweep and calibration") {
    const auto cfg = small_config(20, 300);
    const auto s = sweep_v(cfg, {0.01, 0.1, 1.0}, 2, std::nullopt);
    REQUIRE(s.size() == 3);
    CHECK(s[0].v == 0.01);
    CHECK_THROWS_AS(sweep_v(cfg, {}, 2, std::nullopt), ConfigError);
    CHECK_THROWS_AS(sweep_v(cfg, {0.0}, 2, std::nullopt), ConfigError);

    auto c = calibrate(cfg, PolicyKind::Random, 8, 2);
    CHECK(c.knob == doctest::Approx(0.4));
    CHECK(c.avg_selected == 8.0);

    c = calibrate(cfg, PolicyKind::PEDPC, 10, 2);
    const auto check = run_experiment(cfg, cfg.policy, 2, c.knob, std::nullopt);
    CHECK(std::abs(check.summary.avg_selected - 10.0) <= 2.0);

    c = calibrate(cfg, PolicyKind::FedCS, 20, 2);
    CHECK(c.avg_selected == doctest::Approx(20.0));

    CHECK_THROWS_AS(calibrate(cfg, PolicyKind::Greedy, 10, 2), ConfigError);
    CHECK_THROWS_AS(calibrate(cfg, PolicyKind::PEDPC, 50, 2), Unreachable);
}

TEST_CASE("verify_bounds on tiny instances") {
    auto cfg = parse_config(json{{"system", {{"num_clients", 1}, {"num_rounds", 2}, {"num_frames", 2}}},
                                 {"pedpc", {{"initial_backlog", 100.0}}}});
    auto rep = verify_bounds(cfg, 1.0, 0.05);
    CHECK(rep.lhs_cost == 0.0);
    CHECK(rep.cost_bound_rhs >= 0.0);
    CHECK(rep.all_ok());

    cfg = tiny_config();
    for (double v : {0.1, 1.0, 10.0}) {
        rep = verify_bounds(cfg, v, 0.05);
        CHECK(rep.frame_opt.size() == 2);
        CHECK(rep.lookahead_plans > 0);
        CHECK(rep.all_ok());
    }
    CHECK_THROWS_AS(verify_bounds(small_config(), 1.0, 0.05), TooLarge);
}

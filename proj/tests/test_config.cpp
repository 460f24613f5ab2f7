#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fedsched/config.hpp"
#include "fedsched/errors.hpp"

using namespace fedsched;
using nlohmann::json;

TEST_CASE("empty document gives the standard settings") {
    const auto cfg = parse_config(json::object());
    CHECK(cfg.scenario.system.num_clients == 100);
    CHECK(cfg.scenario.system.num_rounds == 300);
    CHECK(cfg.scenario.system.frame_len == 300);
    CHECK(cfg.scenario.system.num_frames == 1);
    CHECK(cfg.scenario.mode == DataMode::IID);
    CHECK(cfg.policy.kind == PolicyKind::PEDPC);
    CHECK(cfg.pedpc.iter_rounds == 3);
    CHECK(cfg.output.dir == "out");
}

TEST_CASE("frame layout is derived from R") {
    auto cfg = parse_config(json{{"system", {{"num_rounds", 4}, {"num_frames", 2}}}});
    CHECK(cfg.scenario.system.frame_len == 2);
    cfg = parse_config(json{{"system", {{"num_rounds", 6}, {"frame_len", 3}}}});
    CHECK(cfg.scenario.system.num_frames == 2);
    cfg = parse_config(json{{"system", {{"num_rounds", 7}}}});
    CHECK(cfg.scenario.system.frame_len == 7);
    CHECK_THROWS_AS(parse_config(json{{"system", {{"num_rounds", 5}, {"frame_len", 2}}}}),
                    ConfigError);
}

TEST_CASE("values are read from every section") {
    const json doc = {
        {"system", {{"num_clients", 3}, {"num_rounds", 4}, {"min_ratio", 0.05}}},
        {"scenario", {{"seed", 9}, {"mode", "NONIID"}, {"gain_sq", {1e-10, 1e-9}}}},
        {"policy", {{"kind", "FedCS"}, {"latency_cap_s", 0.7}}},
        {"pedpc", {{"v", 2.5}, {"v_growth", 2.0}, {"initial_backlog", 0.1}}},
        {"barrier", {{"tol", 1e-7}}},
        {"output", {{"dir", "results"}}},
    };
    const auto cfg = parse_config(doc);
    CHECK(cfg.scenario.system.num_clients == 3);
    CHECK(cfg.scenario.system.min_ratio == 0.05);
    CHECK(cfg.scenario.seed == 9);
    CHECK(cfg.scenario.mode == DataMode::NONIID);
    CHECK(cfg.scenario.gain_sq.lo == 1e-10);
    CHECK(cfg.policy.kind == PolicyKind::FedCS);
    CHECK(cfg.policy.latency_cap == 0.7);
    CHECK(cfg.pedpc.v == 2.5);
    CHECK(cfg.barrier.tol == 1e-7);
    CHECK(cfg.output.dir == "results");
    CHECK(cfg.pedpc_params().penalty_schedule == std::vector<double>{2.5});

    const auto again = parse_config(to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("schema violations") {
    CHECK_THROWS_AS(parse_config(json{{"extras", json::object()}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"system", {{"clients", 3}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"system", {{"num_clients", "three"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"scenario", {{"mode", "iid"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"scenario", {{"gain_sq", {1e-10}}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"policy", {{"kind", "Oracle"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"pedpc", {{"v", -1.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"barrier", {{"mu_growth", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"system", 3}}), ConfigError);
}

TEST_CASE("loading from disk") {
    const auto dir = std::filesystem::temp_directory_path() / "fedsched_config_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    std::ofstream(dir / "ok.json") << R"({"system": {"num_clients": 5}})";
    CHECK(load_config(dir / "ok.json").scenario.system.num_clients == 5);
    std::filesystem::remove_all(dir);
}

TEST_CASE("error exit codes") {
    CHECK(ConfigError("x").exit_code() == 2);
    CHECK(TooLarge("x").exit_code() == 2);
    CHECK(Infeasible("x").exit_code() == 3);
    CHECK(Unreachable("x").exit_code() == 3);
    CHECK(IoError("x").exit_code() == 1);
}

#pragma once

// Experiment configuration: one JSON document with the sections
// system, scenario, policy, pedpc, barrier and output. Every key is optional
// and falls back to the standard simulation defaults; unknown keys and
// ill-typed values raise ConfigError.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fedsched/bandwidth.hpp"
#include "fedsched/scheduler.hpp"
#include "fedsched/simenv.hpp"

namespace fedsched {

struct PedpcSettings {
    double v = 1.0;
    double v_growth = 1.0;  // V_f = v * v_growth^f
    int iter_rounds = 3;
    double initial_backlog = 0.0;  // Z_k(0) for every client
};

struct OutputSettings {
    std::string dir = "out";
};

struct ExperimentConfig {
    ScenarioSpec scenario;
    PolicySpec policy;
    PedpcSettings pedpc;
    BarrierParams barrier;
    OutputSettings output;

    void validate() const;
    PedpcParams pedpc_params() const;
    PedpcParams pedpc_params(double v) const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

std::string to_string(DataMode mode);

}  // namespace fedsched

#pragma once

// Experiment runner behind the CLI: single runs with CSV/JSON export, V
// sweeps, knob calibration, policy comparison and the tiny-scale check of
// the cost and energy guarantees against an exhaustive lookahead.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedsched/config.hpp"
#include "fedsched/scheduler.hpp"

namespace fedsched {

struct ExperimentSummary {
    std::string policy;
    std::uint64_t seed = 0;
    double v = 0.0;
    std::size_t rounds = 0;
    double avg_selected = 0.0;
    double total_latency = 0.0;
    double avg_cost = 0.0;         // (1/R) sum_r y_0
    double energy_overflow = 0.0;  // sum_k max(0, consumed_k - H_k)
    double total_energy = 0.0;
    double cum_phi = 0.0;
    std::vector<double> per_client_totals;
    std::size_t drift_violations = 0;
    std::size_t descent_violations = 0;
};

struct ExperimentResult {
    ExperimentSummary summary;
    RunTrace trace;
    std::filesystem::path csv_path;  // empty when nothing was written
};

nlohmann::json to_json(const ExperimentSummary& summary);

/// 17 significant digits, '.' decimal separator.
std::string format_double(double x);

/// Per-round CSV with header
/// round,policy,seed,n_selected,latency_s,phi,cost,queue_l2,cum_latency_s,cum_cost,energy_overflow_j
void write_trace_csv(std::ostream& out, const RunTrace& trace, std::uint64_t seed);

/// {policy}_{seed}_{V}.csv
std::string trace_file_name(const std::string& policy, std::uint64_t seed, double v);

Environment make_environment(const ScenarioSpec& spec, const Population& population);

ExperimentSummary summarize(const RunTrace& trace, const std::vector<ClientProfile>& profiles,
                            const std::string& policy, std::uint64_t seed, double v);

/// Runs `policy` for R rounds on the scenario generated from `seed` (which
/// replaces scenario.seed). When `output_dir` is set, writes the per-round
/// CSV and a `.json` summary next to it.
ExperimentResult run_experiment(const ExperimentConfig& config, const PolicySpec& policy,
                                std::uint64_t seed,
                                const std::optional<std::filesystem::path>& output_dir);

/// Same, with the PEDPC schedule starting at `v`.
ExperimentResult run_experiment(const ExperimentConfig& config, const PolicySpec& policy,
                                std::uint64_t seed, double v,
                                const std::optional<std::filesystem::path>& output_dir);

/// One PEDPC run per V on the same scenario. With an output directory it
/// also writes sweep_v_{seed}.csv.
std::vector<ExperimentSummary> sweep_v(const ExperimentConfig& config,
                                       const std::vector<double>& v_grid, std::uint64_t seed,
                                       const std::optional<std::filesystem::path>& output_dir);

struct CalibrationResult {
    PolicyKind policy = PolicyKind::PEDPC;
    double knob = 0.0;  // V, Pr or T_max
    double avg_selected = 0.0;
    int evaluations = 0;
};

/// Tunes the policy's scalar knob until |avg_selected - target| <= 2.
/// Throws Unreachable when the bracket cannot reach the target and
/// ConfigError for policies without a knob.
CalibrationResult calibrate(const ExperimentConfig& config, PolicyKind policy,
                            double target_avg_selected, std::uint64_t seed);

struct ComparisonRow {
    std::string policy;
    double knob = 0.0;
    ExperimentSummary summary;
};

/// Calibrates PEDPC, Random and FedCS to `target_avg`, runs all five
/// policies on the same scenario and (optionally) writes compare_{seed}.csv.
std::vector<ComparisonRow> compare_policies(const ExperimentConfig& config, std::uint64_t seed,
                                            double target_avg,
                                            const std::optional<std::filesystem::path>& output_dir);

struct BoundsReport {
    double v = 0.0;
    double lhs_cost = 0.0;            // (1/R) sum_r y_0 under PEDPC
    std::vector<double> frame_opt;    // c_f* from the lookahead
    double lookahead_opt = 0.0;       // (1/F) sum_f c_f*
    double drift_constant = 0.0;      // D
    double cost_bound_rhs = 0.0;
    bool cost_bound_ok = false;
    std::vector<double> consumed;     // per-client energy under PEDPC
    std::vector<double> energy_limit; // H_k + sqrt(...)
    std::vector<bool> energy_bound_ok;
    std::size_t lookahead_plans = 0;  // frame plans enumerated
    std::size_t drift_violations = 0; // of the PEDPC run

    bool all_ok() const;
};

/// Exhaustive L-round lookahead on a tiny instance (K <= 3, R <= 4) with
/// bandwidth ratios on a `grid_step` lattice, compared with a PEDPC run at
/// constant V on the same channel realisation. Throws TooLarge otherwise.
BoundsReport verify_bounds(const ExperimentConfig& tiny, double v, double grid_step);

nlohmann::json to_json(const BoundsReport& report);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// input is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fedsched

// fedsched: command-line front end for the scheduling experiments.
//
//   fedsched run           --config cfg.json [--seed N] [--out DIR] [--policy NAME]
//   fedsched sweep-v       --config cfg.json --v-grid 0.001,0.01,0.1 [--seed N] [--out DIR]
//   fedsched compare       --config cfg.json [--target-avg 40] [--seed N] [--out DIR]
//   fedsched calibrate     --config cfg.json --policy NAME --target-avg 40 [--seed N]
//   fedsched verify-bounds --config tiny.json --v-grid 0.1,1,10 [--grid-step 0.05]
//
// Exit codes: 0 success, 2 configuration error, 3 infeasible, 4 verification
// failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fedsched/errors.hpp"
#include "fedsched/harness.hpp"

namespace {

using namespace fedsched;

constexpr int kVerificationFailed = 4;

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--v-grid: cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("--v-grid is empty");
    return out;
}

void print_summary(const ExperimentSummary& s) {
    std::cout << s.policy << " seed=" << s.seed << " V=" << format_double(s.v)
              << " avg_selected=" << format_double(s.avg_selected)
              << " total_latency_s=" << format_double(s.total_latency)
              << " avg_cost=" << format_double(s.avg_cost)
              << " energy_overflow_j=" << format_double(s.energy_overflow)
              << " cum_phi=" << format_double(s.cum_phi) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online client selection and bandwidth allocation for wireless federated learning"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string policy_name;
    std::string v_grid_text;
    double target_avg = 40.0;
    double grid_step = 0.05;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "Scenario seed (overrides scenario.seed)");
        cmd->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    };

    auto* run = app.add_subcommand("run", "Run one policy and write the per-round CSV");
    add_common(run);
    run->add_option("--policy", policy_name, "PEDPC, SelectAll, Random, Greedy or FedCS");

    auto* sweep = app.add_subcommand("sweep-v", "Run PEDPC for every V in the grid");
    add_common(sweep);
    sweep->add_option("--v-grid", v_grid_text, "Comma-separated V values")->required();

    auto* compare = app.add_subcommand("compare", "Calibrate and compare all five policies");
    add_common(compare);
    compare->add_option("--target-avg", target_avg, "Target average number of selected clients");

    auto* calib = app.add_subcommand("calibrate", "Tune a policy knob to a target participation");
    add_common(calib);
    calib->add_option("--policy", policy_name, "PEDPC, Random or FedCS")->required();
    calib->add_option("--target-avg", target_avg, "Target average number of selected clients")
        ->required();

    auto* verify = app.add_subcommand("verify-bounds",
                                      "Check the cost and energy guarantees on a tiny instance");
    add_common(verify);
    verify->add_option("--v-grid", v_grid_text, "Comma-separated V values")->required();
    verify->add_option("--grid-step", grid_step, "Bandwidth lattice step of the lookahead");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = load_config(config_path);
        const std::uint64_t s = seed.value_or(cfg.scenario.seed);
        const std::filesystem::path dir = out_dir.empty() ? cfg.output.dir : out_dir;

        if (run->parsed()) {
            PolicySpec policy = cfg.policy;
            if (!policy_name.empty()) policy.kind = parse_policy_kind(policy_name);
            const auto result = run_experiment(cfg, policy, s, dir);
            print_summary(result.summary);
            std::cout << "wrote " << result.csv_path.string() << '\n';
        } else if (sweep->parsed()) {
            const auto summaries = sweep_v(cfg, parse_grid(v_grid_text), s, dir);
            for (const auto& sm : summaries) print_summary(sm);
        } else if (compare->parsed()) {
            const auto rows = compare_policies(cfg, s, target_avg, dir);
            for (const auto& r : rows) {
                std::cout << "knob=" << format_double(r.knob) << ' ';
                print_summary(r.summary);
            }
        } else if (calib->parsed()) {
            const auto r = calibrate(cfg, parse_policy_kind(policy_name), target_avg, s);
            std::cout << to_string(r.policy) << " knob=" << format_double(r.knob)
                      << " avg_selected=" << format_double(r.avg_selected)
                      << " evaluations=" << r.evaluations << '\n';
        } else if (verify->parsed()) {
            bool ok = true;
            nlohmann::json reports = nlohmann::json::array();
            for (double v : parse_grid(v_grid_text)) {
                const auto rep = verify_bounds(cfg, v, grid_step);
                reports.push_back(to_json(rep));
                ok = ok && rep.all_ok();
                std::cout << "V=" << format_double(v) << " lhs=" << format_double(rep.lhs_cost)
                          << " rhs=" << format_double(rep.cost_bound_rhs)
                          << (rep.all_ok() ? " ok" : " VIOLATED") << '\n';
            }
            std::filesystem::create_directories(dir);
            std::ofstream(dir / ("verify_bounds_" + std::to_string(s) + ".json"))
                << reports.dump(2) << '\n';
            if (!ok) return kVerificationFailed;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    return 0;
}

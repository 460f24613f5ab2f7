#include "fedsched/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>

#include "fedsched/errors.hpp"
#include "fedsched/lyapunov.hpp"

namespace fedsched {

using nlohmann::json;

namespace {

constexpr double kCalibrationWindow = 2.0;
constexpr int kCalibrationSteps = 40;

std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

double average_selected(const ExperimentConfig& config, const PolicySpec& policy,
                        std::uint64_t seed, double v) {
    return run_experiment(config, policy, seed, v, std::nullopt).summary.avg_selected;
}

// Bisection of a non-decreasing response over log10(knob) in [lo, hi].
CalibrationResult bisect_log(PolicyKind kind, double target, double lo, double hi,
                             const std::function<double(double)>& response) {
    CalibrationResult result;
    result.policy = kind;
    auto evaluate = [&](double log_knob) {
        ++result.evaluations;
        return response(std::pow(10.0, log_knob));
    };
    double log_lo = std::log10(lo);
    double log_hi = std::log10(hi);
    const double at_lo = evaluate(log_lo);
    const double at_hi = evaluate(log_hi);
    for (auto [log_knob, avg] : {std::pair{log_lo, at_lo}, std::pair{log_hi, at_hi}}) {
        if (std::abs(avg - target) <= kCalibrationWindow) {
            result.knob = std::pow(10.0, log_knob);
            result.avg_selected = avg;
            return result;
        }
    }
    if (at_lo > target || at_hi < target) {
        throw Unreachable("calibrate: target " + format_double(target) + " outside [" +
                          format_double(at_lo) + ", " + format_double(at_hi) + "]");
    }
    for (int i = 0; i < kCalibrationSteps; ++i) {
        const double mid = 0.5 * (log_lo + log_hi);
        const double avg = evaluate(mid);
        if (std::abs(avg - target) <= kCalibrationWindow) {
            result.knob = std::pow(10.0, mid);
            result.avg_selected = avg;
            return result;
        }
        (avg < target ? log_lo : log_hi) = mid;
    }
    throw Unreachable("calibrate: bisection did not reach the target window");
}

// --- exhaustive lookahead -------------------------------------------------

struct PlanStep {
    double cost = 0.0;
    std::vector<double> energy;
};

// Every composition of `cells` into `parts` integers, each at least `lo`.
void compositions(long cells, std::size_t parts, long lo, std::vector<long>& prefix,
                  const std::function<void(const std::vector<long>&)>& emit) {
    if (parts == 1) {
        if (cells >= lo) {
            prefix.push_back(cells);
            emit(prefix);
            prefix.pop_back();
        }
        return;
    }
    for (long c = lo; c <= cells - lo * static_cast<long>(parts - 1); ++c) {
        prefix.push_back(c);
        compositions(cells - c, parts - 1, lo, prefix, emit);
        prefix.pop_back();
    }
}

std::vector<PlanStep> round_candidates(const RoundObservation& obs,
                                       const std::vector<ClientProfile>& profiles,
                                       const SystemConfig& config, double grid_step) {
    const std::size_t n = profiles.size();
    const long cells = std::lround(1.0 / grid_step);
    const long lo = std::max(1L, static_cast<long>(std::ceil(config.min_ratio / grid_step - 1e-9)));
    std::vector<PlanStep> out;
    out.push_back({0.0, std::vector<double>(n, 0.0)});
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < n; ++k) {
            if (mask & (1u << k)) members.push_back(k);
        }
        bool linkable = true;
        for (std::size_t k : members) {
            linkable = linkable && rate_coefficient(profiles[k], obs.gain_sq[k], config) > 0.0;
        }
        if (!linkable) continue;
        std::vector<long> prefix;
        compositions(cells, members.size(), lo, prefix, [&](const std::vector<long>& parts) {
            Decision d = Decision::empty(n);
            for (std::size_t i = 0; i < members.size(); ++i) {
                d.selected[members[i]] = 1;
                d.bandwidth[members[i]] = static_cast<double>(parts[i]) / static_cast<double>(cells);
            }
            const RoundMetrics m = evaluate_round(d, obs, profiles, config);
            out.push_back({m.cost, m.energy});
        });
    }
    // Drop candidates dominated in cost and in every client's energy.
    std::vector<PlanStep> kept;
    for (std::size_t i = 0; i < out.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < out.size() && !dominated; ++j) {
            if (i == j) continue;
            bool le = out[j].cost <= out[i].cost;
            bool strict = out[j].cost < out[i].cost;
            for (std::size_t k = 0; k < n && le; ++k) {
                le = out[j].energy[k] <= out[i].energy[k];
                strict = strict || out[j].energy[k] < out[i].energy[k];
            }
            // Among exact duplicates keep the first.
            dominated = le && (strict || j < i);
        }
        if (!dominated) kept.push_back(out[i]);
    }
    return kept;
}

struct FrameOptimum {
    double value = 0.0;  // c_f* = (1/L) min sum of costs
    std::size_t plans = 0;
};

FrameOptimum frame_lookahead(const std::vector<std::vector<PlanStep>>& rounds,
                             const std::vector<double>& frame_budget) {
    const std::size_t n = frame_budget.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t plans = 0;
    std::vector<double> used(n, 0.0);
    std::function<void(std::size_t, double)> dfs = [&](std::size_t r, double cost) {
        if (r == rounds.size()) {
            ++plans;
            best = std::min(best, cost);
            return;
        }
        for (const auto& step : rounds[r]) {
            bool within = true;
            for (std::size_t k = 0; k < n && within; ++k) {
                within = used[k] + step.energy[k] <= frame_budget[k];
            }
            if (!within) continue;
            for (std::size_t k = 0; k < n; ++k) used[k] += step.energy[k];
            dfs(r + 1, cost + step.cost);
            for (std::size_t k = 0; k < n; ++k) used[k] -= step.energy[k];
        }
    };
    dfs(0, 0.0);
    return {best / static_cast<double>(rounds.size()), plans};
}

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trace_file_name(const std::string& policy, std::uint64_t seed, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return policy + "_" + std::to_string(seed) + "_" + buf + ".csv";
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, std::uint64_t seed) {
    out << "round,policy,seed,n_selected,latency_s,phi,cost,queue_l2,cum_latency_s,cum_cost,"
           "energy_overflow_j\n";
    for (const auto& r : trace.records) {
        out << r.round << ',' << r.policy << ',' << seed << ',' << r.n_selected << ','
            << format_double(r.latency) << ',' << format_double(r.phi) << ','
            << format_double(r.cost) << ',' << format_double(r.queue_l2) << ','
            << format_double(r.cum_latency) << ',' << format_double(r.cum_cost) << ','
            << format_double(r.energy_overflow) << '\n';
    }
}

json to_json(const ExperimentSummary& s) {
    return json{{"policy", s.policy},
                {"seed", s.seed},
                {"v", s.v},
                {"rounds", s.rounds},
                {"avg_selected", s.avg_selected},
                {"total_latency_s", s.total_latency},
                {"avg_cost", s.avg_cost},
                {"energy_overflow_j", s.energy_overflow},
                {"total_energy_j", s.total_energy},
                {"cum_phi", s.cum_phi},
                {"per_client_energy_j", s.per_client_totals},
                {"drift_violations", s.drift_violations},
                {"descent_violations", s.descent_violations}};
}

Environment make_environment(const ScenarioSpec& spec, const Population& population) {
    return Environment{[spec, &population](int r) { return sample_round(spec, r, population); },
                       spec.gain_sq.lo};
}

ExperimentSummary summarize(const RunTrace& trace, const std::vector<ClientProfile>& profiles,
                            const std::string& policy, std::uint64_t seed, double v) {
    ExperimentSummary s;
    s.policy = policy;
    s.seed = seed;
    s.v = v;
    s.rounds = trace.records.size();
    double selected = 0.0;
    double cost = 0.0;
    for (const auto& r : trace.records) {
        selected += static_cast<double>(r.n_selected);
        s.total_latency += r.latency;
        cost += r.cost;
        s.cum_phi += r.phi;
    }
    const double rounds = static_cast<double>(std::max<std::size_t>(s.rounds, 1));
    s.avg_selected = selected / rounds;
    s.avg_cost = cost / rounds;
    s.per_client_totals = trace.consumed;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        s.total_energy += trace.consumed[k];
        s.energy_overflow += std::max(0.0, trace.consumed[k] - profiles[k].energy_budget);
    }
    s.drift_violations = trace.drift_violations;
    s.descent_violations = trace.descent_violations;
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const PolicySpec& policy,
                                std::uint64_t seed,
                                const std::optional<std::filesystem::path>& output_dir) {
    return run_experiment(config, policy, seed, config.pedpc.v, output_dir);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const PolicySpec& policy,
                                std::uint64_t seed, double v,
                                const std::optional<std::filesystem::path>& output_dir) {
    ScenarioSpec spec = config.scenario;
    spec.seed = seed;
    const Population population = generate_population(spec);

    RunOptions options;
    options.policy = policy;
    options.pedpc = config.pedpc_params(v);
    options.barrier = config.barrier;
    options.seed = seed;
    options.initial_backlog.assign(population.profiles.size(), config.pedpc.initial_backlog);

    ExperimentResult result;
    result.trace = run_policy(population.profiles, population.config,
                              make_environment(spec, population), options);
    const std::string name = to_string(policy.kind);
    result.summary = summarize(result.trace, population.profiles, name, seed, v);

    if (output_dir) {
        result.csv_path = *output_dir / trace_file_name(name, seed, v);
        auto out = open_output(result.csv_path);
        write_trace_csv(out, result.trace, seed);
        if (!out) throw IoError("failed writing " + result.csv_path.string());
        auto json_path = result.csv_path;
        json_path.replace_extension(".json");
        write_json(json_path, to_json(result.summary));
    }
    return result;
}

std::vector<ExperimentSummary> sweep_v(const ExperimentConfig& config,
                                       const std::vector<double>& v_grid, std::uint64_t seed,
                                       const std::optional<std::filesystem::path>& output_dir) {
    if (v_grid.empty()) throw ConfigError("sweep-v: empty V grid");
    for (double v : v_grid) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sweep-v: every V must be positive");
    }
    PolicySpec policy = config.policy;
    policy.kind = PolicyKind::PEDPC;
    std::vector<ExperimentSummary> out;
    for (double v : v_grid) {
        out.push_back(run_experiment(config, policy, seed, v, output_dir).summary);
    }
    if (output_dir) {
        auto csv = open_output(*output_dir / ("sweep_v_" + std::to_string(seed) + ".csv"));
        csv << "v,avg_selected,total_latency_s,avg_cost,energy_overflow_j,total_energy_j,cum_phi\n";
        for (const auto& s : out) {
            csv << format_double(s.v) << ',' << format_double(s.avg_selected) << ','
                << format_double(s.total_latency) << ',' << format_double(s.avg_cost) << ','
                << format_double(s.energy_overflow) << ',' << format_double(s.total_energy) << ','
                << format_double(s.cum_phi) << '\n';
        }
    }
    return out;
}

CalibrationResult calibrate(const ExperimentConfig& config, PolicyKind kind,
                            double target, std::uint64_t seed) {
    const int clients = config.scenario.system.num_clients;
    if (!(target >= 0.0) || target > clients) {
        throw Unreachable("calibrate: target must lie in [0, K]");
    }
    PolicySpec policy = config.policy;
    policy.kind = kind;
    switch (kind) {
        case PolicyKind::Random: {
            // floor(Pr K) clients every round, so the knob has a closed form.
            CalibrationResult r;
            r.policy = kind;
            const double count = std::round(target);
            if (count < 1.0) throw Unreachable("calibrate: Random needs at least one client");
            if (count * config.scenario.system.min_ratio > 1.0 + 1e-12) {
                throw Unreachable("calibrate: Random target exceeds floor(1 / b_min)");
            }
            r.knob = count / clients;
            policy.random_fraction = r.knob;
            r.avg_selected = average_selected(config, policy, seed, config.pedpc.v);
            r.evaluations = 1;
            return r;
        }
        case PolicyKind::PEDPC:
            return bisect_log(kind, target, 1e-6, 1e4, [&](double v) {
                return average_selected(config, policy, seed, v);
            });
        case PolicyKind::FedCS:
            return bisect_log(kind, target, 1e-3, 1e4, [&](double cap) {
                PolicySpec p = policy;
                p.latency_cap = cap;
                return average_selected(config, p, seed, config.pedpc.v);
            });
        case PolicyKind::SelectAll:
        case PolicyKind::Greedy:
            break;
    }
    throw ConfigError("calibrate: policy " + to_string(kind) + " has no tunable knob");
}

std::vector<ComparisonRow> compare_policies(const ExperimentConfig& config, std::uint64_t seed,
                                            double target_avg,
                                            const std::optional<std::filesystem::path>& output_dir) {
    std::vector<ComparisonRow> rows;
    for (auto kind : {PolicyKind::PEDPC, PolicyKind::SelectAll, PolicyKind::Random,
                      PolicyKind::Greedy, PolicyKind::FedCS}) {
        PolicySpec policy = config.policy;
        policy.kind = kind;
        double v = config.pedpc.v;
        double knob = 0.0;
        if (kind == PolicyKind::PEDPC || kind == PolicyKind::Random || kind == PolicyKind::FedCS) {
            knob = calibrate(config, kind, target_avg, seed).knob;
            if (kind == PolicyKind::PEDPC) v = knob;
            if (kind == PolicyKind::Random) policy.random_fraction = knob;
            if (kind == PolicyKind::FedCS) policy.latency_cap = knob;
        }
        ComparisonRow row;
        row.policy = to_string(kind);
        row.knob = knob;
        row.summary = run_experiment(config, policy, seed, v, output_dir).summary;
        rows.push_back(std::move(row));
    }
    if (output_dir) {
        auto csv = open_output(*output_dir / ("compare_" + std::to_string(seed) + ".csv"));
        csv << "policy,knob,avg_selected,total_latency_s,energy_overflow_j,total_energy_j,cum_phi,"
               "avg_cost\n";
        for (const auto& r : rows) {
            const auto& s = r.summary;
            csv << r.policy << ',' << format_double(r.knob) << ',' << format_double(s.avg_selected)
                << ',' << format_double(s.total_latency) << ',' << format_double(s.energy_overflow)
                << ',' << format_double(s.total_energy) << ',' << format_double(s.cum_phi) << ','
                << format_double(s.avg_cost) << '\n';
        }
    }
    return rows;
}

bool BoundsReport::all_ok() const {
    return cost_bound_ok &&
           std::all_of(energy_bound_ok.begin(), energy_bound_ok.end(), [](bool b) { return b; });
}

BoundsReport verify_bounds(const ExperimentConfig& tiny, double v, double grid_step) {
    const SystemConfig& sys = tiny.scenario.system;
    if (sys.num_clients > 3 || sys.num_rounds > 4) {
        throw TooLarge("verify-bounds: needs K <= 3 and R <= 4");
    }
    if (!(grid_step > 0.0) || grid_step > 0.5) throw ConfigError("verify-bounds: bad grid step");
    if (!(v > 0.0)) throw ConfigError("verify-bounds: V must be positive");

    const Population pop = generate_population(tiny.scenario);
    const Environment env = make_environment(tiny.scenario, pop);
    const std::vector<double> z0(pop.profiles.size(), tiny.pedpc.initial_backlog);
    const RunTrace trace = pedpc_run(pop.profiles, sys, PedpcParams::constant(v, sys.num_frames,
                                                                               tiny.pedpc.iter_rounds),
                                     env, tiny.barrier, z0);

    BoundsReport rep;
    rep.v = v;
    for (const auto& r : trace.records) rep.lhs_cost += r.cost;
    rep.lhs_cost /= sys.num_rounds;
    rep.drift_constant = trace.bound.constant;
    rep.consumed = trace.consumed;
    rep.drift_violations = trace.drift_violations;

    std::vector<double> frame_budget;
    for (const auto& p : pop.profiles) frame_budget.push_back(p.energy_budget / sys.num_frames);
    for (int f = 0; f < sys.num_frames; ++f) {
        std::vector<std::vector<PlanStep>> rounds;
        for (int r = f * sys.frame_len; r < (f + 1) * sys.frame_len; ++r) {
            rounds.push_back(round_candidates(env.observe(r), pop.profiles, sys, grid_step));
        }
        const FrameOptimum opt = frame_lookahead(rounds, frame_budget);
        rep.frame_opt.push_back(opt.value);
        rep.lookahead_plans += opt.plans;
    }
    rep.lookahead_opt =
        std::accumulate(rep.frame_opt.begin(), rep.frame_opt.end(), 0.0) / sys.num_frames;

    const double y0_initial = lyapunov_value(trace.queues.front());
    const double len = sys.frame_len;
    const double rounds = sys.num_rounds;
    rep.cost_bound_rhs = rep.lookahead_opt + rep.drift_constant * len / v + y0_initial / (v * rounds);
    rep.cost_bound_ok = rep.lhs_cost <= rep.cost_bound_rhs + 1e-12;

    const double y_min = min_round_cost(pop.profiles, sys);
    double gap_sum = 0.0;
    for (double c : rep.frame_opt) gap_sum += c - y_min;
    const double slack =
        std::sqrt(2.0 * rep.drift_constant * rounds * len + 2.0 * v * len * gap_sum + 2.0 * y0_initial);
    for (std::size_t k = 0; k < pop.profiles.size(); ++k) {
        rep.energy_limit.push_back(pop.profiles[k].energy_budget + slack);
        rep.energy_bound_ok.push_back(rep.consumed[k] <= rep.energy_limit[k] + 1e-12);
    }
    return rep;
}

json to_json(const BoundsReport& r) {
    return json{{"v", r.v},
                {"lhs_cost", r.lhs_cost},
                {"frame_opt", r.frame_opt},
                {"lookahead_opt", r.lookahead_opt},
                {"drift_constant", r.drift_constant},
                {"cost_bound_rhs", r.cost_bound_rhs},
                {"cost_bound_ok", r.cost_bound_ok},
                {"consumed_j", r.consumed},
                {"energy_limit_j", r.energy_limit},
                {"energy_bound_ok", r.energy_bound_ok},
                {"lookahead_plans", r.lookahead_plans},
                {"drift_violations", r.drift_violations}};
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return 0.0;
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace fedsched

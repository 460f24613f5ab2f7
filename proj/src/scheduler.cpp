#include "fedsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedsched/errors.hpp"
#include "fedsched/selection.hpp"
#include "fedsched/simenv.hpp"

namespace fedsched {

namespace {

constexpr double kDescentSlack = 1e-9;
constexpr double kRatioSlack = 1e-12;

enum : std::uint64_t { kRandomPolicyStream = 0x72616e64 };  // "rand"

// Quantities of one client in one round that do not depend on bandwidth.
struct ClientRound {
    double rate_coeff = 0.0;
    CompQuantities comp;
    double log_gain = 0.0;  // ln(1 + v_k)
};

std::vector<ClientRound> prepare(const RoundObservation& obs,
                                 std::span<const ClientProfile> profiles,
                                 const SystemConfig& config) {
    std::vector<ClientRound> out(profiles.size());
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        out[k].rate_coeff = rate_coefficient(profiles[k], obs.gain_sq[k], config);
        out[k].comp = comp_quantities(profiles[k]);
        out[k].log_gain = std::log1p(accuracy_gain(profiles[k], config));
    }
    return out;
}

Decision make_decision(std::size_t num_clients, const std::vector<std::size_t>& chosen,
                       const std::vector<double>& ratios) {
    Decision d = Decision::empty(num_clients);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        d.selected[chosen[i]] = 1;
        d.bandwidth[chosen[i]] = ratios[i];
    }
    return d;
}

Decision equal_split(std::size_t num_clients, const std::vector<std::size_t>& chosen) {
    const double share = chosen.empty() ? 0.0 : 1.0 / static_cast<double>(chosen.size());
    return make_decision(num_clients, chosen, std::vector<double>(chosen.size(), share));
}

// Turns scoring ratios on the chosen set into a feasible allocation. Scaling
// up to sum one never raises latency or energy; when that would leave a
// client under b_min the equal split is used instead.
Decision repair(std::size_t num_clients, const std::vector<std::size_t>& chosen,
                const std::vector<double>& scoring, double min_ratio) {
    if (chosen.empty()) return Decision::empty(num_clients);
    double total = 0.0;
    for (std::size_t k : chosen) total += scoring[k];
    std::vector<double> ratios;
    for (std::size_t k : chosen) ratios.push_back(scoring[k] / total);
    if (*std::min_element(ratios.begin(), ratios.end()) < min_ratio - kRatioSlack) {
        return equal_split(num_clients, chosen);
    }
    return make_decision(num_clients, chosen, ratios);
}

// Shared tail of Greedy and FedCS: clamp to b_min, admit in ascending order of
// required ratio while the running total stays within 1, then hand the
// leftover bandwidth to the last admitted client.
Decision admit_by_required_ratio(std::size_t num_clients,
                                 std::vector<std::pair<std::size_t, double>> required,
                                 double min_ratio) {
    for (auto& [k, b] : required) b = std::max(b, min_ratio);
    std::stable_sort(required.begin(), required.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<std::size_t> chosen;
    std::vector<double> ratios;
    double total = 0.0;
    for (const auto& [k, b] : required) {
        if (total + b > 1.0 + kRatioSlack) break;
        total += b;
        chosen.push_back(k);
        ratios.push_back(b);
    }
    if (chosen.empty()) return Decision::empty(num_clients);
    ratios.back() += 1.0 - total;
    return make_decision(num_clients, chosen, ratios);
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::PEDPC: return "PEDPC";
        case PolicyKind::SelectAll: return "SelectAll";
        case PolicyKind::Random: return "Random";
        case PolicyKind::Greedy: return "Greedy";
        case PolicyKind::FedCS: return "FedCS";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
    for (auto kind : {PolicyKind::PEDPC, PolicyKind::SelectAll, PolicyKind::Random,
                      PolicyKind::Greedy, PolicyKind::FedCS}) {
        if (to_string(kind) == name) return kind;
    }
    throw ConfigError("unknown policy '" + name +
                      "' (expected PEDPC, SelectAll, Random, Greedy or FedCS)");
}

void PolicySpec::validate() const {
    if (!(random_fraction > 0.0 && random_fraction <= 1.0)) {
        throw ConfigError("policy.random_fraction must lie in (0, 1]");
    }
    if (!(latency_cap > 0.0)) throw ConfigError("policy.latency_cap_s must be positive");
}

PedpcParams PedpcParams::constant(double v, int num_frames, int iter_rounds) {
    return geometric(v, 1.0, num_frames, iter_rounds);
}

PedpcParams PedpcParams::geometric(double v0, double growth, int num_frames, int iter_rounds) {
    PedpcParams p;
    p.iter_rounds = iter_rounds;
    double v = v0;
    for (int f = 0; f < num_frames; ++f) {
        p.penalty_schedule.push_back(v);
        v *= growth;
    }
    return p;
}

void PedpcParams::validate(const SystemConfig& config) const {
    if (static_cast<int>(penalty_schedule.size()) != config.num_frames) {
        throw ConfigError("pedpc: penalty schedule needs one V per frame");
    }
    for (double v : penalty_schedule) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("pedpc: every V must be positive");
    }
    if (iter_rounds < 1) throw ConfigError("pedpc.iter_rounds must be >= 1");
}

double p3_objective(const Decision& decision, const QueueState& queue,
                    const RoundObservation& observation,
                    std::span<const ClientProfile> profiles, const SystemConfig& config,
                    double penalty_weight) {
    const RoundMetrics m = evaluate_round(decision, observation, profiles, config);
    const double rounds = static_cast<double>(config.num_rounds);
    double drift = 0.0;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        drift += queue.backlog[k] * (m.energy[k] - profiles[k].energy_budget / rounds);
    }
    return drift + penalty_weight * m.cost;
}

RoundSolution solve_round(const QueueState& queue, const RoundObservation& observation,
                          std::span<const ClientProfile> profiles, const SystemConfig& config,
                          double penalty_weight, int iter_rounds,
                          const BarrierParams& barrier) {
    const std::size_t n = profiles.size();
    const auto ctx = prepare(observation, profiles, config);
    auto objective = [&](const Decision& d) {
        return p3_objective(d, queue, observation, profiles, config, penalty_weight);
    };

    RoundSolution sol;
    sol.decision = Decision::empty(n);
    sol.objective = objective(sol.decision);
    sol.trajectory.push_back(sol.objective);

    auto offer = [&](Decision candidate) {
        const double value = objective(candidate);
        if (value <= sol.objective) {
            sol.decision = std::move(candidate);
            sol.objective = value;
        } else {
            ++sol.rejected_steps;
        }
        sol.trajectory.push_back(sol.objective);
    };

    // Clients outside the incumbent are scored as if they held 1/K.
    const double hypothetical =
        std::max(1.0 / static_cast<double>(n), config.min_ratio);
    std::vector<double> scoring(n, hypothetical);

    for (int iter = 0; iter < iter_rounds; ++iter) {
        const double start = sol.objective;

        SelectionInstance inst;
        inst.penalty_weight = penalty_weight;
        inst.max_selected = config.max_selected();
        inst.scores.resize(n);
        inst.latencies.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            if (!(ctx[k].rate_coeff > 0.0)) {
                inst.scores[k] = 0.0;
                inst.latencies[k] = std::numeric_limits<double>::infinity();
                continue;
            }
            const auto comm = comm_quantities(profiles[k], ctx[k].rate_coeff, scoring[k]);
            const double price =
                energy_price(queue.backlog[k], profiles[k], ctx[k].rate_coeff, scoring[k]);
            inst.scores[k] = price - penalty_weight * ctx[k].log_gain;
            inst.latencies[k] = ctx[k].comp.latency + comm.latency;
        }
        const SelectionResult picked = itmcs(inst);
        std::vector<std::size_t> chosen;
        for (std::size_t k = 0; k < n; ++k) {
            if (picked.selected[k]) chosen.push_back(k);
        }
        offer(repair(n, chosen, scoring, config.min_ratio));

        const auto current = sol.decision.selected_indices();
        if (!current.empty()) {
            const auto m = static_cast<Eigen::Index>(current.size());
            AllocationInstance alloc;
            alloc.penalty_weight = penalty_weight;
            alloc.min_ratio = config.min_ratio;
            alloc.comp_latency.resize(m);
            alloc.lat_coeff.resize(m);
            alloc.price_coeff.resize(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const std::size_t k = current[static_cast<std::size_t>(i)];
                const double s_over_g = profiles[k].model_size / ctx[k].rate_coeff;
                alloc.comp_latency[i] = ctx[k].comp.latency;
                alloc.lat_coeff[i] = s_over_g;
                alloc.price_coeff[i] = profiles[k].tx_power * queue.backlog[k] * s_over_g;
            }
            const Allocation a = barrier_solve(alloc, barrier);
            offer(make_decision(n, current,
                                std::vector<double>(a.ratios.data(), a.ratios.data() + m)));
        } else {
            sol.trajectory.push_back(sol.objective);
        }

        std::fill(scoring.begin(), scoring.end(), hypothetical);
        for (std::size_t k : sol.decision.selected_indices()) scoring[k] = sol.decision.bandwidth[k];

        if (start - sol.objective < kDescentSlack) break;
    }
    return sol;
}

Decision baseline_select_all(const RoundObservation&, std::span<const ClientProfile> profiles,
                             const SystemConfig& config) {
    const double share = 1.0 / static_cast<double>(profiles.size());
    if (share < config.min_ratio - kRatioSlack) {
        throw InfeasibleConfig("select-all: 1/K is below b_min");
    }
    std::vector<std::size_t> all(profiles.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return equal_split(profiles.size(), all);
}

Decision baseline_random(const RoundObservation&, std::span<const ClientProfile> profiles,
                         const SystemConfig& config, double fraction, std::uint64_t seed,
                         int round_index) {
    const std::size_t n = profiles.size();
    const auto count =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
    if (count < 1) throw InfeasibleConfig("random: floor(Pr * K) must be at least 1");
    if (static_cast<double>(count) * config.min_ratio > 1.0 + kRatioSlack) {
        throw InfeasibleConfig("random: floor(Pr * K) * b_min exceeds 1");
    }
    // Partial Fisher-Yates draws `count` distinct clients.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    CounterRng rng(seed, kRandomPolicyStream, static_cast<std::uint64_t>(round_index));
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<long>(count));
    std::sort(chosen.begin(), chosen.end());
    return equal_split(n, chosen);
}

Decision baseline_greedy(const RoundObservation& observation,
                         std::span<const ClientProfile> profiles, const SystemConfig& config) {
    const double rounds = static_cast<double>(config.num_rounds);
    std::vector<std::pair<std::size_t, double>> required;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto& p = profiles[k];
        const double g = rate_coefficient(p, observation.gain_sq[k], config);
        const double headroom = p.energy_budget / rounds - comp_quantities(p).energy;
        if (!(g > 0.0) || !(headroom > 0.0)) continue;
        required.emplace_back(k, p.tx_power * p.model_size / (g * headroom));
    }
    return admit_by_required_ratio(profiles.size(), std::move(required), config.min_ratio);
}

Decision baseline_fedcs(const RoundObservation& observation,
                        std::span<const ClientProfile> profiles, const SystemConfig& config,
                        double latency_cap) {
    std::vector<std::pair<std::size_t, double>> required;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto& p = profiles[k];
        const double g = rate_coefficient(p, observation.gain_sq[k], config);
        const double headroom = latency_cap - comp_quantities(p).latency;
        if (!(g > 0.0) || !(headroom > 0.0)) continue;
        required.emplace_back(k, p.model_size / (g * headroom));
    }
    return admit_by_required_ratio(profiles.size(), std::move(required), config.min_ratio);
}

RunTrace run_policy(const std::vector<ClientProfile>& profiles, const SystemConfig& config,
                    const Environment& env, const RunOptions& options) {
    config.validate();
    options.policy.validate();
    const bool pedpc = options.policy.kind == PolicyKind::PEDPC;
    if (pedpc) options.pedpc.validate(config);
    const std::size_t n = profiles.size();
    if (n != static_cast<std::size_t>(config.num_clients)) {
        throw ConfigError("run: profile count differs from system.num_clients");
    }

    RunTrace trace;
    QueueState queue = QueueState::zeros(n);
    if (!options.initial_backlog.empty()) {
        if (options.initial_backlog.size() != n) throw ConfigError("run: Z(0) has wrong length");
        queue.backlog = options.initial_backlog;
    }
    std::vector<double> max_energy(n);
    for (std::size_t k = 0; k < n; ++k) {
        max_energy[k] = worst_case_energy(profiles[k], config, env.min_gain_sq);
    }
    trace.bound = drift_bound(profiles, config, max_energy);
    trace.queues.push_back(queue);
    trace.consumed.assign(n, 0.0);

    const std::string name = to_string(options.policy.kind);
    double cum_latency = 0.0;
    double cum_cost = 0.0;
    for (int r = 0; r < config.num_rounds; ++r) {
        const RoundObservation obs = env.observe(r);
        Decision decision;
        switch (options.policy.kind) {
            case PolicyKind::PEDPC: {
                const double v =
                    options.pedpc.penalty_schedule[static_cast<std::size_t>(r / config.frame_len)];
                RoundSolution sol = solve_round(queue, obs, profiles, config, v,
                                                options.pedpc.iter_rounds, options.barrier);
                for (std::size_t i = 1; i < sol.trajectory.size(); ++i) {
                    if (sol.trajectory[i] > sol.trajectory[i - 1] + kDescentSlack) {
                        ++trace.descent_violations;
                    }
                }
                trace.half_steps += sol.trajectory.size() - 1;
                trace.rejected_steps += static_cast<std::size_t>(sol.rejected_steps);
                decision = std::move(sol.decision);
                break;
            }
            case PolicyKind::SelectAll:
                decision = baseline_select_all(obs, profiles, config);
                break;
            case PolicyKind::Random:
                decision = baseline_random(obs, profiles, config,
                                           options.policy.random_fraction, options.seed, r);
                break;
            case PolicyKind::Greedy:
                decision = baseline_greedy(obs, profiles, config);
                break;
            case PolicyKind::FedCS:
                decision = baseline_fedcs(obs, profiles, config, options.policy.latency_cap);
                break;
        }
        decision.validate(config);

        const RoundMetrics metrics = evaluate_round(decision, obs, profiles, config);
        const QueueState next = update_queue(queue, decision, metrics.energy, profiles, config);
        if (!drift_check(queue, next, decision, metrics.energy, profiles, config, trace.bound)
                 .holds()) {
            ++trace.drift_violations;
        }

        double overflow = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            trace.consumed[k] += metrics.energy[k];
            overflow += std::max(0.0, trace.consumed[k] - profiles[k].energy_budget);
        }
        cum_latency += metrics.round_latency;
        cum_cost += metrics.cost;

        RoundRecord rec;
        rec.round = r;
        rec.policy = name;
        rec.n_selected = decision.num_selected();
        rec.latency = metrics.round_latency;
        rec.phi = metrics.phi;
        rec.cost = metrics.cost;
        rec.per_client_energy = metrics.energy;
        rec.queue_l2 = l2_norm(next.backlog);
        rec.cum_latency = cum_latency;
        rec.cum_cost = cum_cost;
        rec.energy_overflow = overflow;
        trace.records.push_back(std::move(rec));
        trace.decisions.push_back(std::move(decision));

        queue = next;
        trace.queues.push_back(queue);
    }
    return trace;
}

RunTrace pedpc_run(const std::vector<ClientProfile>& profiles, const SystemConfig& config,
                   const PedpcParams& params, const Environment& env,
                   const BarrierParams& barrier, std::vector<double> initial_backlog) {
    RunOptions options;
    options.policy.kind = PolicyKind::PEDPC;
    options.pedpc = params;
    options.barrier = barrier;
    options.initial_backlog = std::move(initial_backlog);
    return run_policy(profiles, config, env, options);
}

}  // namespace fedsched

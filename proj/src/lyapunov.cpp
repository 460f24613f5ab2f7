#include "fedsched/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fedsched/errors.hpp"

namespace fedsched {

QueueState QueueState::zeros(std::size_t num_clients) {
    return QueueState{std::vector<double>(num_clients, 0.0), 0};
}

QueueState update_queue(const QueueState& state, const Decision& decision,
                        std::span<const double> energies,
                        std::span<const ClientProfile> profiles,
                        const SystemConfig& config) {
    QueueState next;
    next.round_index = state.round_index + 1;
    next.backlog.resize(state.backlog.size());
    const double rounds = static_cast<double>(config.num_rounds);
    for (std::size_t k = 0; k < state.backlog.size(); ++k) {
        const double used = decision.is_selected(k) ? energies[k] : 0.0;
        next.backlog[k] =
            std::max(state.backlog[k] + used - profiles[k].energy_budget / rounds, 0.0);
    }
    return next;
}

double lyapunov_value(const QueueState& state) {
    double sum = 0.0;
    for (double z : state.backlog) sum += z * z;
    return 0.5 * sum;
}

DriftBound drift_bound(std::span<const ClientProfile> profiles,
                       const SystemConfig& config,
                       std::span<const double> max_energy) {
    DriftBound bound;
    const double rounds = static_cast<double>(config.num_rounds);
    double acc = 0.0;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        if (!std::isfinite(max_energy[k])) {
            throw InfeasibleBound("drift bound: client " + std::to_string(k) +
                                  " has unbounded per-round energy");
        }
        const double credit = profiles[k].energy_budget / rounds;
        const double lo = -credit;
        const double hi = max_energy[k] - credit;
        bound.y_min.push_back(lo);
        bound.y_max.push_back(hi);
        acc += std::max(lo * lo, hi * hi);
    }
    bound.constant = 0.5 * acc;
    return bound;
}

double worst_case_energy(const ClientProfile& profile, const SystemConfig& config,
                         double min_gain_sq) {
    const double g = rate_coefficient(profile, min_gain_sq, config);
    const auto comp = comp_quantities(profile);
    if (!(g > 0.0)) return std::numeric_limits<double>::infinity();
    return comp.energy + profile.tx_power * profile.model_size / (config.min_ratio * g);
}

double energy_price(double backlog, const ClientProfile& profile, double rate_coeff,
                    double ratio) {
    if (backlog == 0.0) return 0.0;
    const auto comp = comp_quantities(profile);
    const double rate = ratio * rate_coeff;
    if (!(rate > 0.0)) throw InfeasibleLink("energy price: zero rate with positive backlog");
    return backlog * (comp.energy + profile.tx_power * profile.model_size / rate);
}

DriftCheck drift_check(const QueueState& before, const QueueState& after,
                       const Decision& decision, std::span<const double> energies,
                       std::span<const ClientProfile> profiles,
                       const SystemConfig& config, const DriftBound& bound) {
    const double rounds = static_cast<double>(config.num_rounds);
    double linear = 0.0;
    for (std::size_t k = 0; k < before.backlog.size(); ++k) {
        const double used = decision.is_selected(k) ? energies[k] : 0.0;
        linear += before.backlog[k] * (used - profiles[k].energy_budget / rounds);
    }
    return {lyapunov_value(after) - lyapunov_value(before), bound.constant + linear};
}

std::vector<std::vector<double>> stability_series(std::span<const QueueState> trace) {
    std::vector<std::vector<double>> out;
    out.reserve(trace.size());
    for (const auto& state : trace) {
        std::vector<double> row(state.backlog.size(), 0.0);
        if (state.round_index >= 1) {
            const double r = static_cast<double>(state.round_index);
            for (std::size_t k = 0; k < row.size(); ++k) row[k] = state.backlog[k] / r;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<bool> energy_lower_bound_holds(const QueueState& initial,
                                           const QueueState& final_state,
                                           std::span<const double> consumed,
                                           std::span<const ClientProfile> profiles,
                                           double slack) {
    std::vector<bool> ok(profiles.size());
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const double lhs = final_state.backlog[k] - initial.backlog[k];
        const double rhs = consumed[k] - profiles[k].energy_budget;
        ok[k] = lhs >= rhs - slack;
    }
    return ok;
}

}  // namespace fedsched

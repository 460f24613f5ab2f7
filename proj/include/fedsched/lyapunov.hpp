#pragma once

// Virtual energy-deficit queues and the quantities derived from them.

#include <cstddef>
#include <span>
#include <vector>

#include "fedsched/model.hpp"

namespace fedsched {

/// Snapshot of the per-client energy deficit Z_k(r).
struct QueueState {
    std::vector<double> backlog;
    int round_index = 0;

    static QueueState zeros(std::size_t num_clients);
};

/// Z_k(r+1) = max(Z_k(r) + x_k E_k - H_k / R, 0).
QueueState update_queue(const QueueState& state, const Decision& decision,
                        std::span<const double> energies,
                        std::span<const ClientProfile> profiles,
                        const SystemConfig& config);

/// 0.5 * sum_k Z_k^2.
double lyapunov_value(const QueueState& state);

/// Per-client range of x_k E_k - H_k / R and the constant
/// D = 0.5 * sum_k max(y_min^2, y_max^2) bounding the quadratic drift term.
struct DriftBound {
    std::vector<double> y_min;
    std::vector<double> y_max;
    double constant = 0.0;
};

/// Throws InfeasibleBound if any max_energy entry is not finite.
DriftBound drift_bound(std::span<const ClientProfile> profiles,
                       const SystemConfig& config,
                       std::span<const double> max_energy);

/// Largest energy one round can cost the client: bandwidth b_min and the
/// weakest channel the environment can produce.
double worst_case_energy(const ClientProfile& profile, const SystemConfig& config,
                         double min_gain_sq);

/// Z'_k = Z_k * (E_cmp + p S / (b G)). Throws InfeasibleLink when b G = 0
/// and the backlog is positive.
double energy_price(double backlog, const ClientProfile& profile, double rate_coeff,
                    double ratio);

/// Both sides of the one-step drift inequality
/// Y(Z(r+1)) - Y(Z(r)) <= D + sum_k Z_k(r)(x_k E_k - H_k / R).
struct DriftCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds(double slack = 1e-12) const { return lhs <= rhs + slack; }
};

DriftCheck drift_check(const QueueState& before, const QueueState& after,
                       const Decision& decision, std::span<const double> energies,
                       std::span<const ClientProfile> profiles,
                       const SystemConfig& config, const DriftBound& bound);

/// Z_k(r) / r for every snapshot with r >= 1; row i belongs to trace[i].
std::vector<std::vector<double>> stability_series(std::span<const QueueState> trace);

/// Per-client check of Z_k(R) - Z_k(0) >= sum_r x_k E_k - H_k.
std::vector<bool> energy_lower_bound_holds(const QueueState& initial,
                                           const QueueState& final_state,
                                           std::span<const double> consumed,
                                           std::span<const ClientProfile> profiles,
                                           double slack = 1e-9);

}  // namespace fedsched

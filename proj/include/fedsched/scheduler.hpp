#pragma once

// Per-round scheduling policies and the round loop that drives them.
//
// PEDPC minimises, each round, the drift-plus-penalty objective
//
//   sum_k Z_k (x_k E_k - H_k / R) + V * (T_0 - Phi)
//
// by alternating exact client selection (ITMCS) with barrier-method bandwidth
// allocation. The four baselines are the usual comparison points: select
// all, select at random, greedy under the per-round energy budget, and
// FedCS under a latency cap.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fedsched/bandwidth.hpp"
#include "fedsched/lyapunov.hpp"
#include "fedsched/model.hpp"

namespace fedsched {

enum class PolicyKind { PEDPC, SelectAll, Random, Greedy, FedCS };

std::string to_string(PolicyKind kind);
/// Throws ConfigError on an unknown name.
PolicyKind parse_policy_kind(const std::string& name);

struct PolicySpec {
    PolicyKind kind = PolicyKind::PEDPC;
    double random_fraction = 0.4;  // Pr, Random only
    double latency_cap = 1.0;      // T_max in seconds, FedCS only

    void validate() const;
};

struct PedpcParams {
    std::vector<double> penalty_schedule;  // V_f for each frame
    int iter_rounds = 3;                   // I

    static PedpcParams constant(double v, int num_frames, int iter_rounds = 3);
    /// V_f = v0 * growth^f.
    static PedpcParams geometric(double v0, double growth, int num_frames, int iter_rounds = 3);

    void validate(const SystemConfig& config) const;
};

/// The per-round drift-plus-penalty objective with the constant D dropped.
double p3_objective(const Decision& decision, const QueueState& queue,
                    const RoundObservation& observation,
                    std::span<const ClientProfile> profiles, const SystemConfig& config,
                    double penalty_weight);

struct RoundSolution {
    Decision decision;
    double objective = 0.0;
    /// Incumbent objective: initial value, then after every half-step.
    std::vector<double> trajectory;
    /// Half-steps whose candidate was worse than the incumbent and discarded.
    int rejected_steps = 0;
};

RoundSolution solve_round(const QueueState& queue, const RoundObservation& observation,
                          std::span<const ClientProfile> profiles, const SystemConfig& config,
                          double penalty_weight, int iter_rounds,
                          const BarrierParams& barrier = {});

Decision baseline_select_all(const RoundObservation& observation,
                             std::span<const ClientProfile> profiles,
                             const SystemConfig& config);

Decision baseline_random(const RoundObservation& observation,
                         std::span<const ClientProfile> profiles, const SystemConfig& config,
                         double fraction, std::uint64_t seed, int round_index);

Decision baseline_greedy(const RoundObservation& observation,
                         std::span<const ClientProfile> profiles,
                         const SystemConfig& config);

Decision baseline_fedcs(const RoundObservation& observation,
                        std::span<const ClientProfile> profiles, const SystemConfig& config,
                        double latency_cap);

/// Metrics of one executed round.
struct RoundRecord {
    int round = 0;
    std::string policy;
    std::size_t n_selected = 0;
    double latency = 0.0;  // T_0
    double phi = 0.0;
    double cost = 0.0;     // y_0
    std::vector<double> per_client_energy;
    double queue_l2 = 0.0;  // ||Z(r+1)||_2 after the update
    double cum_latency = 0.0;
    double cum_cost = 0.0;
    double energy_overflow = 0.0;  // sum_k max(0, consumed_k - H_k) so far
};

/// Source of channel observations plus the weakest gain it can emit, which
/// sizes the drift-bound constant.
struct Environment {
    std::function<RoundObservation(int)> observe;
    double min_gain_sq = 0.0;
};

struct RunOptions {
    PolicySpec policy;
    PedpcParams pedpc;
    BarrierParams barrier;
    std::uint64_t seed = 1;
    /// Z(0); zeros when empty.
    std::vector<double> initial_backlog;
};

struct RunTrace {
    std::vector<RoundRecord> records;
    std::vector<QueueState> queues;  // Z(0) .. Z(R)
    std::vector<Decision> decisions;
    std::vector<double> consumed;    // per-client total energy
    DriftBound bound;
    std::size_t drift_violations = 0;
    std::size_t descent_violations = 0;
    std::size_t half_steps = 0;
    std::size_t rejected_steps = 0;
};

/// Runs R rounds of `options.policy`: observe, decide, apply, update queues,
/// record. The drift inequality and (for PEDPC) half-step descent are
/// audited on every round.
RunTrace run_policy(const std::vector<ClientProfile>& profiles, const SystemConfig& config,
                    const Environment& env, const RunOptions& options);

/// run_policy with the PEDPC policy.
RunTrace pedpc_run(const std::vector<ClientProfile>& profiles, const SystemConfig& config,
                   const PedpcParams& params, const Environment& env,
                   const BarrierParams& barrier = {},
                   std::vector<double> initial_backlog = {});

}  // namespace fedsched

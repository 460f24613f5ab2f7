#pragma once

// Per-round physical model of a wireless federated-learning round: local
// computation, uplink transmission, round latency, the data-size accuracy
// proxy and the latency-minus-accuracy cost.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fedsched {

/// Static hardware, data and energy parameters of one client.
struct ClientProfile {
    double cpu_freq = 0.0;        // cycles/s
    double cycles_per_bit = 0.0;  // cycles/bit
    double capacitance = 0.0;     // effective switched capacitance
    double tx_power = 0.0;        // W
    double model_size = 0.0;      // bits uploaded per round
    double data_size = 0.0;       // bits of local data
    double energy_budget = 0.0;   // J over the whole run
    int local_iters = 0;

    /// Throws ConfigError unless every field is strictly positive.
    void validate() const;
};

struct SystemConfig {
    int num_clients = 100;
    int num_rounds = 300;
    int frame_len = 300;
    int num_frames = 1;
    double bandwidth = 1e7;       // Hz
    double min_ratio = 0.01;      // b_min
    double noise_power = 1e-13;   // W
    double accuracy_coeff = 1.7e-8;

    void validate() const;

    /// Largest number of clients that can each receive b_min.
    std::size_t max_selected() const;
};

struct RoundObservation {
    std::vector<double> gain_sq;
};

/// One round's selection and bandwidth ratios. Unselected clients carry a
/// zero ratio; selected ratios sum to one.
struct Decision {
    std::vector<std::uint8_t> selected;
    std::vector<double> bandwidth;

    static Decision empty(std::size_t num_clients);

    std::size_t num_clients() const { return selected.size(); }
    std::size_t num_selected() const;
    bool is_selected(std::size_t k) const { return selected[k] != 0; }
    std::vector<std::size_t> selected_indices() const;

    /// Throws InfeasibleConfig when the selection/bandwidth invariants fail.
    void validate(const SystemConfig& config) const;
};

struct CompQuantities {
    double energy = 0.0;
    double latency = 0.0;
};

struct CommQuantities {
    double rate = 0.0;
    double latency = 0.0;
    double energy = 0.0;
};

struct RoundTotals {
    double latency = 0.0;
    double energy = 0.0;
};

/// Shannon rate per unit bandwidth ratio, B * log2(1 + p h^2 / N0).
double rate_coefficient(const ClientProfile& profile, double gain_sq,
                        const SystemConfig& config);

CompQuantities comp_quantities(const ClientProfile& profile);

/// Throws InfeasibleLink when ratio * rate_coeff is zero.
CommQuantities comm_quantities(const ClientProfile& profile, double rate_coeff,
                               double ratio);

RoundTotals client_round_totals(const ClientProfile& profile, double rate_coeff,
                                double ratio);

/// max_k x_k T_k; zero for an empty selection.
double round_latency(const Decision& decision, std::span<const double> totals);

/// v_k = mu * D_k.
double accuracy_gain(const ClientProfile& profile, const SystemConfig& config);

/// Sum over selected clients of ln(1 + v_k).
double accuracy_utility(const Decision& decision,
                        std::span<const ClientProfile> profiles,
                        const SystemConfig& config);

double round_cost(const Decision& decision, std::span<const double> totals,
                  std::span<const ClientProfile> profiles,
                  const SystemConfig& config);

/// Most negative cost any decision can reach: -sum_k ln(1 + v_k).
double min_round_cost(std::span<const ClientProfile> profiles,
                      const SystemConfig& config);

/// Everything a round produces once a decision is applied.
struct RoundMetrics {
    std::vector<double> latency;  // T_k for selected clients, 0 otherwise
    std::vector<double> energy;   // E_k for selected clients, 0 otherwise
    double round_latency = 0.0;
    double phi = 0.0;
    double cost = 0.0;
};

RoundMetrics evaluate_round(const Decision& decision,
                            const RoundObservation& observation,
                            std::span<const ClientProfile> profiles,
                            const SystemConfig& config);

}  // namespace fedsched

#include "fedsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsched/errors.hpp"

namespace fedsched {

namespace {

constexpr double kSumTolerance = 1e-9;

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string("client profile field '") + name +
                          "' must be finite and strictly positive");
    }
}

}  // namespace

void ClientProfile::validate() const {
    require_positive(cpu_freq, "cpu_freq");
    require_positive(cycles_per_bit, "cycles_per_bit");
    require_positive(capacitance, "capacitance");
    require_positive(tx_power, "tx_power");
    require_positive(model_size, "model_size");
    require_positive(data_size, "data_size");
    require_positive(energy_budget, "energy_budget");
    if (local_iters < 1) {
        throw ConfigError("client profile field 'local_iters' must be a positive integer");
    }
}

void SystemConfig::validate() const {
    if (num_clients < 1) throw ConfigError("system.num_clients must be >= 1");
    if (num_rounds < 1) throw ConfigError("system.num_rounds must be >= 1");
    if (frame_len < 1 || num_frames < 1) {
        throw ConfigError("system.frame_len and system.num_frames must be >= 1");
    }
    if (frame_len * num_frames != num_rounds) {
        throw ConfigError("system.num_rounds must equal frame_len * num_frames");
    }
    if (!(min_ratio > 0.0 && min_ratio <= 1.0)) {
        throw ConfigError("system.min_ratio must lie in (0, 1]");
    }
    if (!(bandwidth > 0.0)) throw ConfigError("system.bandwidth_hz must be > 0");
    if (!(noise_power > 0.0)) throw ConfigError("system.noise_power_w must be > 0");
    if (!(accuracy_coeff > 0.0)) throw ConfigError("system.accuracy_coeff must be > 0");
}

std::size_t SystemConfig::max_selected() const {
    // The epsilon keeps 1/0.01 from rounding down to 99.
    return static_cast<std::size_t>(std::floor(1.0 / min_ratio + 1e-9));
}

Decision Decision::empty(std::size_t num_clients) {
    Decision d;
    d.selected.assign(num_clients, 0);
    d.bandwidth.assign(num_clients, 0.0);
    return d;
}

std::size_t Decision::num_selected() const {
    return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), 1));
}

std::vector<std::size_t> Decision::selected_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        if (selected[k]) out.push_back(k);
    }
    return out;
}

void Decision::validate(const SystemConfig& config) const {
    if (bandwidth.size() != selected.size()) {
        throw InfeasibleConfig("decision: selection and bandwidth sizes differ");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        if (selected[k] > 1) throw InfeasibleConfig("decision: selection must be 0 or 1");
        if (selected[k]) {
            ++count;
            if (bandwidth[k] < config.min_ratio - kSumTolerance) {
                throw InfeasibleConfig("decision: selected client below b_min");
            }
            sum += bandwidth[k];
        } else if (bandwidth[k] != 0.0) {
            throw InfeasibleConfig("decision: unselected client holds bandwidth");
        }
    }
    if (count > 0 && std::abs(sum - 1.0) > kSumTolerance) {
        throw InfeasibleConfig("decision: selected bandwidth ratios must sum to 1");
    }
}

double rate_coefficient(const ClientProfile& profile, double gain_sq,
                        const SystemConfig& config) {
    return config.bandwidth * std::log2(1.0 + profile.tx_power * gain_sq / config.noise_power);
}

CompQuantities comp_quantities(const ClientProfile& p) {
    const double cycles = static_cast<double>(p.local_iters) * p.cycles_per_bit * p.data_size;
    return {cycles * p.capacitance * p.cpu_freq * p.cpu_freq, cycles / p.cpu_freq};
}

CommQuantities comm_quantities(const ClientProfile& profile, double rate_coeff,
                               double ratio) {
    const double rate = ratio * rate_coeff;
    if (!(rate > 0.0)) {
        throw InfeasibleLink("client cannot transmit: zero rate");
    }
    const double latency = profile.model_size / rate;
    return {rate, latency, profile.tx_power * latency};
}

RoundTotals client_round_totals(const ClientProfile& profile, double rate_coeff,
                                double ratio) {
    const auto comp = comp_quantities(profile);
    const auto comm = comm_quantities(profile, rate_coeff, ratio);
    return {comp.latency + comm.latency, comp.energy + comm.energy};
}

double round_latency(const Decision& decision, std::span<const double> totals) {
    double latency = 0.0;
    for (std::size_t k = 0; k < decision.num_clients(); ++k) {
        if (decision.is_selected(k)) latency = std::max(latency, totals[k]);
    }
    return latency;
}

double accuracy_gain(const ClientProfile& profile, const SystemConfig& config) {
    return config.accuracy_coeff * profile.data_size;
}

double accuracy_utility(const Decision& decision,
                        std::span<const ClientProfile> profiles,
                        const SystemConfig& config) {
    double phi = 0.0;
    for (std::size_t k = 0; k < decision.num_clients(); ++k) {
        if (decision.is_selected(k)) phi += std::log1p(accuracy_gain(profiles[k], config));
    }
    return phi;
}

double round_cost(const Decision& decision, std::span<const double> totals,
                  std::span<const ClientProfile> profiles,
                  const SystemConfig& config) {
    return round_latency(decision, totals) - accuracy_utility(decision, profiles, config);
}

double min_round_cost(std::span<const ClientProfile> profiles,
                      const SystemConfig& config) {
    double sum = 0.0;
    for (const auto& p : profiles) sum += std::log1p(accuracy_gain(p, config));
    return -sum;
}

RoundMetrics evaluate_round(const Decision& decision,
                            const RoundObservation& observation,
                            std::span<const ClientProfile> profiles,
                            const SystemConfig& config) {
    const std::size_t n = decision.num_clients();
    RoundMetrics m;
    m.latency.assign(n, 0.0);
    m.energy.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (!decision.is_selected(k)) continue;
        const double g = rate_coefficient(profiles[k], observation.gain_sq[k], config);
        const auto totals = client_round_totals(profiles[k], g, decision.bandwidth[k]);
        m.latency[k] = totals.latency;
        m.energy[k] = totals.energy;
    }
    m.round_latency = round_latency(decision, m.latency);
    m.phi = accuracy_utility(decision, profiles, config);
    m.cost = m.round_latency - m.phi;
    return m;
}

}  // namespace fedsched

#pragma once

// Seeded synthetic client populations and per-round channel draws.
//
// Every random value is a pure function of (seed, stream, indices), so the
// observation of round r can be regenerated without replaying earlier rounds.

#include <array>
#include <cstdint>
#include <vector>

#include "fedsched/model.hpp"

namespace fedsched {

enum class DataMode { IID, NONIID };

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Parameter ranges of the synthetic environment. Defaults reproduce the
/// standard simulation table: K=100, R=300, 10 MHz, N0=1e-13 W and so on.
struct ScenarioSpec {
    std::uint64_t seed = 1;
    DataMode mode = DataMode::IID;
    SystemConfig system;

    Range cpu_freq{1e7, 1e9};       // Hz
    Range cycles_per_bit{1.0, 10.0};
    Range tx_power_dbm{10.0, 20.0};
    Range gain_sq{1e-11, 1e-9};     // log-uniform
    double capacitance = 1e-28;
    double model_size = 2.4e5;      // bits
    double energy_budget = 1.5;     // J
    int local_iters = 5;
    double iid_data_size = 3.6e6;   // bits
    std::vector<double> noniid_data_sizes{1.2e6, 2.4e6, 3.6e6, 4.8e6, 6.0e6};

    void validate() const;
};

struct Population {
    std::vector<ClientProfile> profiles;
    SystemConfig config;
};

double dbm_to_watts(double dbm);

Population generate_population(const ScenarioSpec& spec);

RoundObservation sample_round(const ScenarioSpec& spec, int round_index,
                              const Population& population);

/// Counter-based generator (SplitMix64 finaliser over a running counter).
/// Cheap to construct from any key tuple; used for every random draw.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : state_(key) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0,
               std::uint64_t b = 0);

    std::uint64_t next();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
};

}  // namespace fedsched

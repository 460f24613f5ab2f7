#include "fedsched/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsched/errors.hpp"

namespace fedsched {

namespace {

enum Stream : std::uint64_t {
    kProfileStream = 0x70726f66,  // "prof"
    kChannelStream = 0x6368616e,  // "chan"
};

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void require_range(const Range& r, const char* name, bool positive = true) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi) ||
        (positive && !(r.lo > 0.0))) {
        throw ConfigError(std::string("scenario range '") + name + "' is empty or invalid");
    }
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                       std::uint64_t b)
    : state_(mix(mix(mix(seed ^ mix(stream)) ^ a) + b)) {}

std::uint64_t CounterRng::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
}

double CounterRng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % n;
}

void ScenarioSpec::validate() const {
    system.validate();
    require_range(cpu_freq, "cpu_freq_hz");
    require_range(cycles_per_bit, "cycles_per_bit");
    require_range(tx_power_dbm, "tx_power_dbm", false);
    require_range(gain_sq, "gain_sq");
    if (!(capacitance > 0.0) || !(model_size > 0.0) || !(energy_budget > 0.0) ||
        local_iters < 1 || !(iid_data_size > 0.0)) {
        throw ConfigError("scenario: scalar parameters must be strictly positive");
    }
    if (noniid_data_sizes.empty()) throw ConfigError("scenario: noniid_data_bits is empty");
    for (double d : noniid_data_sizes) {
        if (!(d > 0.0)) throw ConfigError("scenario: noniid_data_bits entries must be positive");
    }
}

double dbm_to_watts(double dbm) {
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

Population generate_population(const ScenarioSpec& spec) {
    spec.validate();
    Population pop;
    pop.config = spec.system;
    const auto k_count = static_cast<std::size_t>(spec.system.num_clients);
    pop.profiles.reserve(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        CounterRng rng(spec.seed, kProfileStream, k);
        ClientProfile p;
        p.cpu_freq = rng.uniform(spec.cpu_freq.lo, spec.cpu_freq.hi);
        p.cycles_per_bit = rng.uniform(spec.cycles_per_bit.lo, spec.cycles_per_bit.hi);
        p.tx_power = dbm_to_watts(rng.uniform(spec.tx_power_dbm.lo, spec.tx_power_dbm.hi));
        const std::size_t pick = rng.below(spec.noniid_data_sizes.size());
        p.data_size = spec.mode == DataMode::IID ? spec.iid_data_size
                                                 : spec.noniid_data_sizes[pick];
        p.capacitance = spec.capacitance;
        p.model_size = spec.model_size;
        p.energy_budget = spec.energy_budget;
        p.local_iters = spec.local_iters;
        p.validate();
        pop.profiles.push_back(p);
    }
    return pop;
}

RoundObservation sample_round(const ScenarioSpec& spec, int round_index,
                              const Population& population) {
    if (round_index < 0 || round_index >= spec.system.num_rounds) {
        throw ConfigError("sample_round: round index outside [0, R)");
    }
    const double log_lo = std::log10(spec.gain_sq.lo);
    const double log_hi = std::log10(spec.gain_sq.hi);
    RoundObservation obs;
    obs.gain_sq.resize(population.profiles.size());
    for (std::size_t k = 0; k < obs.gain_sq.size(); ++k) {
        CounterRng rng(spec.seed, kChannelStream, static_cast<std::uint64_t>(round_index), k);
        const double g = std::pow(10.0, rng.uniform(log_lo, log_hi));
        obs.gain_sq[k] = std::clamp(g, spec.gain_sq.lo, spec.gain_sq.hi);
    }
    return obs;
}

}  // namespace fedsched

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fedsched/errors.hpp"
#include "fedsched/simenv.hpp"

using namespace fedsched;

TEST_CASE("dBm conversion") {
    CHECK(dbm_to_watts(20.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(dbm_to_watts(10.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(dbm_to_watts(30.0) == 1.0);
}

TEST_CASE("default population") {
    const ScenarioSpec spec;
    const auto pop = generate_population(spec);
    REQUIRE(pop.profiles.size() == 100);
    for (const auto& p : pop.profiles) {
        CHECK(p.energy_budget == 1.5);
        CHECK(p.model_size == 2.4e5);
        CHECK(p.data_size == 3.6e6);
        CHECK(p.local_iters == 5);
        CHECK(p.capacitance == 1e-28);
        CHECK(p.cpu_freq >= 1e7);
        CHECK(p.cpu_freq <= 1e9);
        CHECK(p.cycles_per_bit >= 1.0);
        CHECK(p.cycles_per_bit <= 10.0);
        CHECK(p.tx_power >= 0.01 - 1e-15);
        CHECK(p.tx_power <= 0.1 + 1e-15);
    }
    CHECK(pop.config.num_clients == 100);
    CHECK(pop.config.num_rounds == 300);
}

TEST_CASE("non-IID data sizes come from the configured set") {
    ScenarioSpec spec;
    spec.mode = DataMode::NONIID;
    const auto pop = generate_population(spec);
    std::set<double> seen;
    for (const auto& p : pop.profiles) {
        const auto& allowed = spec.noniid_data_sizes;
        CHECK(std::find(allowed.begin(), allowed.end(), p.data_size) != allowed.end());
        seen.insert(p.data_size);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("populations and observations are reproducible") {
    ScenarioSpec spec;
    spec.seed = 42;
    const auto a = generate_population(spec);
    const auto b = generate_population(spec);
    for (std::size_t k = 0; k < a.profiles.size(); ++k) {
        CHECK(a.profiles[k].cpu_freq == b.profiles[k].cpu_freq);
        CHECK(a.profiles[k].tx_power == b.profiles[k].tx_power);
    }
    CHECK(sample_round(spec, 17, a).gain_sq == sample_round(spec, 17, b).gain_sq);
    CHECK(sample_round(spec, 17, a).gain_sq != sample_round(spec, 18, a).gain_sq);
    spec.seed = 43;
    CHECK(generate_population(spec).profiles[0].cpu_freq != a.profiles[0].cpu_freq);
}

TEST_CASE("round observations are random access") {
    ScenarioSpec spec;
    const auto pop = generate_population(spec);
    const auto late = sample_round(spec, 250, pop);
    for (int r = 0; r < 250; ++r) sample_round(spec, r, pop);
    CHECK(sample_round(spec, 250, pop).gain_sq == late.gain_sq);
    CHECK_THROWS_AS(sample_round(spec, 300, pop), ConfigError);
    CHECK_THROWS_AS(sample_round(spec, -1, pop), ConfigError);
}

TEST_CASE("channel gains are log-uniform over the configured range") {
    ScenarioSpec spec;
    spec.system.num_rounds = 1000;
    spec.system.frame_len = 1000;
    const auto pop = generate_population(spec);
    std::vector<double> logs;
    for (int r = 0; r < 1000; ++r) {
        for (double g : sample_round(spec, r, pop).gain_sq) {
            CHECK(g >= 1e-11);
            CHECK(g <= 1e-9);
            logs.push_back(std::log10(g));
        }
    }
    REQUIRE(logs.size() == 100000);
    std::nth_element(logs.begin(), logs.begin() + 50000, logs.end());
    CHECK(std::abs(logs[50000] + 10.0) <= 0.02);
}

TEST_CASE("counter rng") {
    CounterRng a(1, 2, 3, 4), b(1, 2, 3, 4), c(1, 2, 3, 5);
    CHECK(a.next() == b.next());
    CHECK(a.next() != c.next());
    CounterRng r(99);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        ++counts[r.below(7)];
    }
    for (int n : counts) CHECK(std::abs(n - 10000) < 500);
}

TEST_CASE("scenario validation") {
    ScenarioSpec spec;
    spec.cpu_freq = {1e9, 1e7};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ScenarioSpec{};
    spec.noniid_data_sizes.clear();
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ScenarioSpec{};
    spec.gain_sq = {0.0, 1e-9};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

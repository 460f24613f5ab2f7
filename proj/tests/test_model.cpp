#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedsched/errors.hpp"
#include "fedsched/model.hpp"
#include "test_support.hpp"

using namespace fedsched;
using testing::example_client;
using testing::make_decision;

// Rate of the example link: 1e7 * log2(101).
constexpr double kG = 66582114.82751795;

TEST_CASE("rate coefficient") {
    SystemConfig cfg;
    auto p = example_client();
    CHECK(rate_coefficient(p, 1e-10, cfg) == doctest::Approx(kG).epsilon(1e-14));
    CHECK(rate_coefficient(p, 0.0, cfg) == 0.0);
    p.tx_power = 0.01;
    CHECK(rate_coefficient(p, 1e-11, cfg) == doctest::Approx(1e7).epsilon(1e-14));
}

TEST_CASE("computation energy and latency") {
    auto p = example_client();
    auto c = comp_quantities(p);
    CHECK(c.energy == doctest::Approx(6e-3).epsilon(1e-12));
    CHECK(c.latency == doctest::Approx(0.06).epsilon(1e-12));

    p.cpu_freq = 2e9;
    c = comp_quantities(p);
    CHECK(c.energy == doctest::Approx(2.4e-2).epsilon(1e-12));
    CHECK(c.latency == doctest::Approx(0.03).epsilon(1e-12));

    auto q = example_client();
    q.data_size *= 2.0;
    const auto c1 = comp_quantities(example_client());
    const auto c2 = comp_quantities(q);
    CHECK(c2.energy == doctest::Approx(2.0 * c1.energy));
    CHECK(c2.latency == doctest::Approx(2.0 * c1.latency));
}

TEST_CASE("profile validation") {
    auto p = example_client();
    CHECK_NOTHROW(p.validate());
    p.data_size = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = example_client();
    p.local_iters = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("communication quantities") {
    const auto p = example_client();
    auto c = comm_quantities(p, kG, 0.1);
    CHECK(c.rate == doctest::Approx(6658211.482751795).epsilon(1e-14));
    CHECK(c.latency == doctest::Approx(0.03604571597368511).epsilon(1e-12));
    CHECK(c.energy == doctest::Approx(3.6045715973685114e-3).epsilon(1e-12));
    c = comm_quantities(p, kG, 1.0);
    CHECK(c.latency == doctest::Approx(3.604571597368511e-3).epsilon(1e-12));
    CHECK_THROWS_AS(comm_quantities(p, 0.0, 0.5), InfeasibleLink);
}

TEST_CASE("client round totals") {
    const auto p = example_client();
    auto t = client_round_totals(p, kG, 0.1);
    CHECK(t.latency == doctest::Approx(0.09604571597368511).epsilon(1e-12));
    CHECK(t.energy == doctest::Approx(9.604571597368512e-3).epsilon(1e-12));
    t = client_round_totals(p, kG, 1.0);
    CHECK(t.latency == doctest::Approx(0.06360457159736851).epsilon(1e-12));
    CHECK(t.energy == doctest::Approx(6.360457159736851e-3).epsilon(1e-12));
}

TEST_CASE("round latency is the max over selected clients") {
    const std::vector<double> T{0.1, 0.3, 0.9};
    CHECK(round_latency(make_decision({1, 1, 0}, {0.5, 0.5, 0}), T) == 0.3);
    CHECK(round_latency(Decision::empty(3), T) == 0.0);
    CHECK(round_latency(make_decision({1, 1, 1}, {0.3, 0.3, 0.4}), T) == 0.9);
}

TEST_CASE("accuracy utility and cost") {
    SystemConfig cfg;
    const std::vector<ClientProfile> one{example_client()};
    CHECK(accuracy_gain(one[0], cfg) == doctest::Approx(0.0204));
    CHECK(accuracy_utility(make_decision({1}, {1.0}), one, cfg) ==
          doctest::Approx(0.020194707285519253).epsilon(1e-14));
    CHECK(accuracy_utility(Decision::empty(1), one, cfg) == 0.0);

    const std::vector<ClientProfile> two{example_client(), example_client()};
    CHECK(accuracy_utility(make_decision({1, 1}, {0.5, 0.5}), two, cfg) ==
          doctest::Approx(0.04038941457103851).epsilon(1e-14));

    CHECK(round_cost(Decision::empty(1), std::vector<double>{0.4}, one, cfg) == 0.0);
    const double y0 = round_cost(make_decision({1}, {1.0}),
                                 std::vector<double>{0.09604571597368511}, one, cfg);
    CHECK(y0 == doctest::Approx(0.07585100868816586).epsilon(1e-12));
    CHECK(min_round_cost(two, cfg) == doctest::Approx(-0.04038941457103851));
}

TEST_CASE("evaluate_round matches the per-client formulas") {
    SystemConfig cfg;
    cfg.num_clients = 2;
    const std::vector<ClientProfile> profiles{example_client(), example_client()};
    RoundObservation obs{{1e-10, 1e-11}};
    const auto d = make_decision({1, 0}, {1.0, 0.0});
    const auto m = evaluate_round(d, obs, profiles, cfg);
    CHECK(m.latency[0] == doctest::Approx(0.06360457159736851).epsilon(1e-12));
    CHECK(m.latency[1] == 0.0);
    CHECK(m.energy[1] == 0.0);
    CHECK(m.round_latency == m.latency[0]);
    CHECK(m.cost == doctest::Approx(m.round_latency - m.phi));
}

TEST_CASE("decision validation") {
    SystemConfig cfg;
    cfg.num_clients = 3;
    CHECK_NOTHROW(make_decision({1, 0, 1}, {0.5, 0.0, 0.5}).validate(cfg));
    CHECK_NOTHROW(Decision::empty(3).validate(cfg));
    CHECK_THROWS_AS(make_decision({1, 0, 1}, {0.5, 0.0, 0.4}).validate(cfg), InfeasibleConfig);
    CHECK_THROWS_AS(make_decision({1, 0, 1}, {0.995, 0.0, 0.005}).validate(cfg), InfeasibleConfig);
    CHECK_THROWS_AS(make_decision({1, 0, 0}, {0.9, 0.1, 0.0}).validate(cfg), InfeasibleConfig);
    CHECK(make_decision({1, 0, 1}, {0.5, 0.0, 0.5}).num_selected() == 2);
}

TEST_CASE("system config") {
    SystemConfig cfg;
    CHECK(cfg.max_selected() == 100);
    cfg.min_ratio = 0.18;
    CHECK(cfg.max_selected() == 5);
    cfg.min_ratio = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

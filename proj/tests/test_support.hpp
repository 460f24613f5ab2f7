#pragma once

#include <vector>

#include "fedsched/model.hpp"

namespace testing {

// The worked example client: U=5, c=10, D=1.2 Mbit, f=1 GHz, p=0.1 W.
inline fedsched::ClientProfile example_client() {
    fedsched::ClientProfile p;
    p.cpu_freq = 1e9;
    p.cycles_per_bit = 10.0;
    p.capacitance = 1e-28;
    p.tx_power = 0.1;
    p.model_size = 2.4e5;
    p.data_size = 1.2e6;
    p.energy_budget = 1.5;
    p.local_iters = 5;
    return p;
}

inline fedsched::Decision make_decision(const std::vector<int>& sel, const std::vector<double>& bw) {
    fedsched::Decision d;
    d.selected.assign(sel.begin(), sel.end());
    d.bandwidth = bw;
    return d;
}

}  // namespace testing

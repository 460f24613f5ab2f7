#pragma once

// Client selection with bandwidth held fixed:
//
//   min_S  V * max_{k in S} T_k + sum_{k in S} q_k
//
// solved exactly by scanning latency-sorted prefixes of the clients with a
// negative score (ITMCS). An exhaustive enumerator is provided as an oracle.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fedsched {

struct SelectionInstance {
    std::vector<double> scores;     // q_k
    std::vector<double> latencies;  // T_k; +inf marks a client that cannot transmit
    double penalty_weight = 1.0;    // V
    /// Largest admissible |S|; unset means unbounded.
    std::optional<std::size_t> max_selected;

    std::size_t size() const { return scores.size(); }
};

struct SelectionResult {
    std::vector<std::uint8_t> selected;
    double objective = 0.0;
};

/// q_k = Z'_k - V ln(1 + v_k).
double marginal_score(double price, double gain, double penalty_weight);

/// W(S); W of the empty set is 0.
double selection_objective(std::span<const std::size_t> subset,
                           const SelectionInstance& instance);

SelectionResult itmcs(const SelectionInstance& instance);

/// Exact minimiser over all 2^K subsets. Ties prefer the smaller subset, then
/// the lexicographically smaller index list. Throws TooLarge for K > 20.
SelectionResult brute_force_selection(const SelectionInstance& instance);

}  // namespace fedsched

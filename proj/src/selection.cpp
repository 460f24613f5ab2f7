#include "fedsched/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedsched/errors.hpp"

namespace fedsched {

namespace {

constexpr std::size_t kBruteForceLimit = 20;

bool eligible(const SelectionInstance& instance, std::size_t k) {
    return instance.scores[k] < 0.0 && std::isfinite(instance.latencies[k]);
}

}  // namespace

double marginal_score(double price, double gain, double penalty_weight) {
    return price - penalty_weight * std::log1p(gain);
}

double selection_objective(std::span<const std::size_t> subset,
                           const SelectionInstance& instance) {
    if (subset.empty()) return 0.0;
    double max_latency = 0.0;
    double score_sum = 0.0;
    for (std::size_t k : subset) {
        max_latency = std::max(max_latency, instance.latencies[k]);
        score_sum += instance.scores[k];
    }
    return instance.penalty_weight * max_latency + score_sum;
}

SelectionResult itmcs(const SelectionInstance& instance) {
    const std::size_t n = instance.size();
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < n; ++k) {
        if (eligible(instance, k)) order.push_back(k);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return instance.latencies[a] < instance.latencies[b];
    });
    const std::size_t cap = std::min(order.size(), instance.max_selected.value_or(order.size()));

    SelectionResult result;
    result.selected.assign(n, 0);
    result.objective = 0.0;
    if (cap == order.size()) {
        // Prefix i is the i fastest eligible clients; its max latency is that
        // of the last one added.
        std::size_t best_len = 0;
        double score_sum = 0.0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const std::size_t k = order[i];
            score_sum += instance.scores[k];
            const double w = instance.penalty_weight * instance.latencies[k] + score_sum;
            if (w < result.objective) {
                result.objective = w;
                best_len = i + 1;
            }
        }
        for (std::size_t i = 0; i < best_len; ++i) result.selected[order[i]] = 1;
        return result;
    }
    if (cap == 0) return result;

    // Binding cap: with order[i] as the slowest member, the best companions
    // are the cap - 1 most negative scores among order[0..i). A max-heap keeps
    // them as i advances.
    auto worse = [&](std::size_t a, std::size_t b) { return instance.scores[a] < instance.scores[b]; };
    std::vector<std::size_t> heap;
    double heap_sum = 0.0;
    std::size_t best_last = order.size();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t k = order[i];
        const double w = instance.penalty_weight * instance.latencies[k] + instance.scores[k] + heap_sum;
        if (w < result.objective) {
            result.objective = w;
            best_last = i;
        }
        heap.push_back(k);
        std::push_heap(heap.begin(), heap.end(), worse);
        heap_sum += instance.scores[k];
        if (heap.size() > cap - 1) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap_sum -= instance.scores[heap.back()];
            heap.pop_back();
        }
    }
    if (best_last == order.size()) return result;
    std::vector<std::size_t> before(order.begin(), order.begin() + static_cast<long>(best_last));
    std::stable_sort(before.begin(), before.end(), worse);
    before.resize(std::min(before.size(), cap - 1));
    result.selected[order[best_last]] = 1;
    for (std::size_t k : before) result.selected[k] = 1;
    return result;
}

SelectionResult brute_force_selection(const SelectionInstance& instance) {
    const std::size_t n = instance.size();
    if (n > kBruteForceLimit) {
        throw TooLarge("brute_force_selection supports at most 20 clients");
    }
    const std::size_t cap = instance.max_selected.value_or(n);

    std::vector<std::size_t> best_set;
    double best = 0.0;
    std::vector<std::size_t> subset;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        subset.clear();
        bool feasible = true;
        for (std::size_t k = 0; k < n; ++k) {
            if (mask & (1u << k)) {
                if (!std::isfinite(instance.latencies[k])) feasible = false;
                subset.push_back(k);
            }
        }
        if (!feasible || subset.size() > cap) continue;
        const double w = selection_objective(subset, instance);
        const bool better =
            w < best ||
            (w == best && (subset.size() < best_set.size() ||
                           (subset.size() == best_set.size() && subset < best_set)));
        if (better) {
            best = w;
            best_set = subset;
        }
    }

    SelectionResult result;
    result.selected.assign(n, 0);
    for (std::size_t k : best_set) result.selected[k] = 1;
    result.objective = best;
    return result;
}

}  // namespace fedsched

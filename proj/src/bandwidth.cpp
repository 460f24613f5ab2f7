#include "fedsched/bandwidth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#include "fedsched/errors.hpp"

namespace fedsched {

namespace {

std::atomic<std::uint64_t> g_lse_evaluations{0};
std::atomic<std::uint64_t> g_lse_violations{0};

constexpr double kFeasibilitySlack = 1e-12;

struct Softmax {
    double lse = 0.0;
    double max = 0.0;
    Eigen::VectorXd weights;
};

Softmax softmax(const Eigen::VectorXd& h) {
    Softmax s;
    s.max = h.maxCoeff();
    s.weights = (h.array() - s.max).exp();
    const double total = s.weights.sum();
    s.weights /= total;
    s.lse = s.max + std::log(total);

    const double gap = s.lse - s.max;
    g_lse_evaluations.fetch_add(1, std::memory_order_relaxed);
    if (gap < 0.0 || gap > lse_error_bound(static_cast<std::size_t>(h.size())) + 1e-12) {
        g_lse_violations.fetch_add(1, std::memory_order_relaxed);
    }
    return s;
}

Eigen::VectorXd arguments(const Eigen::VectorXd& b, const AllocationInstance& inst) {
    return inst.comp_latency.array() + inst.lat_coeff.array() / b.array();
}

Allocation finish(Eigen::VectorXd ratios, const AllocationInstance& inst, int iterations,
                  double gap) {
    Allocation a;
    a.objective = smoothed_objective(ratios, inst, false).value;
    a.exact_objective = exact_objective(ratios, inst);
    a.ratios = std::move(ratios);
    a.iterations = iterations;
    a.duality_gap = gap;
    return a;
}

// Barrier-augmented objective t f(b) - sum ln(b_i - b_min); +inf outside the box.
double barrier_value(const Eigen::VectorXd& b, const AllocationInstance& inst, double t) {
    const Eigen::ArrayXd slack = b.array() - inst.min_ratio;
    if ((slack <= 0.0).any()) return std::numeric_limits<double>::infinity();
    return t * smoothed_objective(b, inst, false).value - slack.log().sum();
}

// Equality-constrained Newton direction for t f(b) - sum ln(b_i - b_min).
//
// The Hessian is diag(d) - c u u^T with d > 0 and c > 0, so A^{-1} is applied
// with Sherman-Morrison. The KKT multiplier w for 1^T db = 0 follows from
// eliminating db = -A^{-1}(g + w 1).
struct NewtonStep {
    Eigen::VectorXd direction;
    Eigen::VectorXd gradient;
    double decrement_sq = 0.0;
};

NewtonStep newton_step(const Eigen::VectorXd& b, const AllocationInstance& inst, double t) {
    const Eigen::ArrayXd h = arguments(b, inst).array();
    const Softmax sm = softmax(h.matrix());
    const Eigen::ArrayXd pi = sm.weights.array();
    const Eigen::ArrayXd inv_b = b.array().inverse();
    const Eigen::ArrayXd dh = -inst.lat_coeff.array() * inv_b.square();          // h'_i
    const Eigen::ArrayXd d2h = 2.0 * inst.lat_coeff.array() * inv_b.cube();      // h''_i
    const Eigen::ArrayXd slack = b.array() - inst.min_ratio;
    const double v = inst.penalty_weight;

    const Eigen::ArrayXd grad =
        t * (v * pi * dh - inst.price_coeff.array() * inv_b.square()) - slack.inverse();

    // r_i is the part of the diagonal left after the rank-one term absorbs
    // t V pi_i h'_i^2; it keeps the Sherman-Morrison denominator positive.
    const Eigen::ArrayXd rest =
        t * (v * pi * d2h + 2.0 * inst.price_coeff.array() * inv_b.cube()) + slack.inverse().square();
    const Eigen::ArrayXd diag = rest + t * v * pi * dh.square();
    const Eigen::ArrayXd u = pi * dh;
    const double c = t * v;
    const double denom = (pi * rest / diag).sum();

    auto apply_inverse = [&](const Eigen::ArrayXd& x) -> Eigen::ArrayXd {
        const Eigen::ArrayXd dx = x / diag;
        const Eigen::ArrayXd du = u / diag;
        return dx + du * (c * (u * dx).sum() / denom);
    };

    const Eigen::ArrayXd inv_g = apply_inverse(grad);
    const Eigen::ArrayXd inv_1 = apply_inverse(Eigen::ArrayXd::Ones(grad.size()));
    const double w = -inv_g.sum() / inv_1.sum();
    NewtonStep step;
    step.direction = (-(inv_g + w * inv_1)).matrix();
    step.gradient = grad.matrix();
    step.decrement_sq = -step.gradient.dot(step.direction);
    return step;
}

}  // namespace

void AllocationInstance::validate() const {
    const auto m = size();
    if (m < 1) throw Infeasible("allocation: no selected clients");
    if (lat_coeff.size() != m || price_coeff.size() != m) {
        throw Infeasible("allocation: coefficient vectors differ in length");
    }
    auto bad = [](const Eigen::VectorXd& x) {
        return !x.allFinite() || (x.array() < 0.0).any();
    };
    if (bad(comp_latency) || bad(lat_coeff) || bad(price_coeff)) {
        throw Infeasible("allocation: coefficients must be finite and non-negative");
    }
    if (!(penalty_weight > 0.0)) throw Infeasible("allocation: V must be positive");
    if (static_cast<double>(m) * min_ratio > 1.0 + kFeasibilitySlack) {
        throw Infeasible("allocation: m * b_min exceeds 1");
    }
}

double log_sum_exp(std::span<const double> x) {
    const double mx = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (double xi : x) sum += std::exp(xi - mx);
    return mx + std::log(sum);
}

double lse_error_bound(std::size_t m) {
    return std::log(static_cast<double>(m));
}

SmoothedEval smoothed_objective(const Eigen::VectorXd& ratios,
                                const AllocationInstance& inst, bool with_hessian) {
    const Eigen::ArrayXd inv_b = ratios.array().inverse();
    const Softmax sm = softmax(arguments(ratios, inst));
    const Eigen::ArrayXd pi = sm.weights.array();
    const Eigen::ArrayXd dh = -inst.lat_coeff.array() * inv_b.square();
    const double v = inst.penalty_weight;

    SmoothedEval e;
    e.value = v * sm.lse + (inst.price_coeff.array() * inv_b).sum();
    e.gradient = (v * pi * dh - inst.price_coeff.array() * inv_b.square()).matrix();
    if (with_hessian) {
        const Eigen::ArrayXd d2h = 2.0 * inst.lat_coeff.array() * inv_b.cube();
        const Eigen::VectorXd u = (pi * dh).matrix();
        const Eigen::ArrayXd diag =
            v * pi * (d2h + dh.square()) + 2.0 * inst.price_coeff.array() * inv_b.cube();
        e.hessian = diag.matrix().asDiagonal();
        e.hessian.noalias() -= v * u * u.transpose();
    }
    return e;
}

double exact_objective(const Eigen::VectorXd& ratios, const AllocationInstance& inst) {
    return inst.penalty_weight * arguments(ratios, inst).maxCoeff() +
           (inst.price_coeff.array() / ratios.array()).sum();
}

Allocation barrier_solve(const AllocationInstance& inst, const BarrierParams& params) {
    inst.validate();
    const auto m = inst.size();
    const double dm = static_cast<double>(m);

    if (m == 1) return finish(Eigen::VectorXd::Ones(1), inst, 0, 0.0);
    if (dm * inst.min_ratio >= 1.0 - kFeasibilitySlack) {
        return finish(Eigen::VectorXd::Constant(m, inst.min_ratio), inst, 0, 0.0);
    }

    Eigen::VectorXd b = Eigen::VectorXd::Constant(m, 1.0 / dm);
    double t = params.t0;
    int iterations = 0;
    constexpr double kCenteringTol = 1e-10;
    constexpr int kMaxBacktracks = 80;

    while (true) {
        // Centering: Newton on t f(b) - sum ln(b_i - b_min) over 1^T b = 1.
        while (true) {
            const NewtonStep step = newton_step(b, inst, t);
            if (step.decrement_sq / 2.0 <= kCenteringTol || !(step.decrement_sq > 0.0)) break;
            if (++iterations > params.max_newton) {
                throw NoConverge("barrier: Newton iteration budget exhausted");
            }
            const double f0 = barrier_value(b, inst, t);
            const double slope = step.gradient.dot(step.direction);
            double s = 1.0;
            Eigen::VectorXd candidate = b + s * step.direction;
            int backtracks = 0;
            double f1 = barrier_value(candidate, inst, t);
            while (f1 > f0 + params.ls_alpha * s * slope) {
                if (++backtracks > kMaxBacktracks) break;
                s *= params.ls_beta;
                candidate = b + s * step.direction;
                f1 = barrier_value(candidate, inst, t);
            }
            // Centered to working precision once no step strictly decreases
            // the barrier function.
            if (backtracks > kMaxBacktracks || !(f1 < f0)) break;
            // Re-project onto the simplex to stop roundoff drift in 1^T b.
            candidate.array() += (1.0 - candidate.sum()) / dm;
            if ((candidate.array() <= inst.min_ratio).any()) break;
            b = std::move(candidate);
        }
        const double gap = dm / t;
        if (gap <= params.tol) return finish(std::move(b), inst, iterations, gap);
        t *= params.mu_growth;
    }
}

Allocation grid_oracle(const AllocationInstance& inst, double step) {
    inst.validate();
    const auto m = inst.size();
    if (m > 3) throw TooLarge("grid_oracle supports at most 3 selected clients");
    if (!(step > 0.0) || step > 1e-3) throw ConfigError("grid_oracle step must lie in (0, 1e-3]");

    if (m == 1) return finish(Eigen::VectorXd::Ones(1), inst, 0, 0.0);

    const auto cells = static_cast<long>(std::llround(1.0 / step));
    const auto lo = static_cast<long>(std::ceil(inst.min_ratio / step - 1e-9));
    Eigen::VectorXd best;
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd b(m);
    auto consider = [&]() {
        const double value = smoothed_objective(b, inst, false).value;
        if (value < best_value) {
            best_value = value;
            best = b;
        }
    };
    if (m == 2) {
        for (long i = lo; i <= cells - lo; ++i) {
            b << static_cast<double>(i) / cells, static_cast<double>(cells - i) / cells;
            consider();
        }
    } else {
        for (long i = lo; i <= cells - 2 * lo; ++i) {
            for (long j = lo; j <= cells - i - lo; ++j) {
                b << static_cast<double>(i) / cells, static_cast<double>(j) / cells,
                    static_cast<double>(cells - i - j) / cells;
                consider();
            }
        }
    }
    if (best.size() == 0) throw Infeasible("grid_oracle: no lattice point satisfies b_min");
    return finish(std::move(best), inst, 0, 0.0);
}

LseAudit lse_audit() {
    return {g_lse_evaluations.load(), g_lse_violations.load()};
}

}  // namespace fedsched

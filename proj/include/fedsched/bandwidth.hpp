#pragma once

// Bandwidth allocation over a fixed set of m selected clients:
//
//   min_b  V * LSE_i(C_i + S'_i / b_i) + sum_i G'_i / b_i
//   s.t.   b_i >= b_min,  sum_i b_i = 1
//
// where LSE is log-sum-exp, a smooth upper bound on the max within ln(m).
// The problem is convex; it is solved with a log-barrier interior-point
// method whose Newton steps handle the equality constraint through the KKT
// system.

#include <Eigen/Core>
#include <cstdint>
#include <span>

namespace fedsched {

struct AllocationInstance {
    Eigen::VectorXd comp_latency;  // C_i = T_i^cmp
    Eigen::VectorXd lat_coeff;     // S'_i = S_i / G_i
    Eigen::VectorXd price_coeff;   // G'_i = p_i Z_i S_i / G_i
    double penalty_weight = 1.0;   // V
    double min_ratio = 0.01;       // b_min

    Eigen::Index size() const { return comp_latency.size(); }
    void validate() const;
};

struct Allocation {
    Eigen::VectorXd ratios;
    double objective = 0.0;        // smoothed objective at `ratios`
    double exact_objective = 0.0;  // same with the true max in place of LSE
    int iterations = 0;            // Newton steps taken
    double duality_gap = 0.0;
};

struct SmoothedEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;  // left empty unless requested
};

struct BarrierParams {
    double t0 = 1.0;
    double mu_growth = 20.0;
    double tol = 1e-8;
    int max_newton = 2000;
    double ls_alpha = 0.25;
    double ls_beta = 0.5;
};

/// ln(sum_i exp(x_i)) with the max-shift.
double log_sum_exp(std::span<const double> x);

/// ln(m): worst-case gap between log-sum-exp and the max of m terms.
double lse_error_bound(std::size_t m);

/// Value, gradient and (optionally) Hessian of the smoothed objective at
/// strictly positive ratios.
SmoothedEval smoothed_objective(const Eigen::VectorXd& ratios,
                                const AllocationInstance& instance,
                                bool with_hessian = true);

/// The non-smoothed objective V * max_i(C_i + S'_i / b_i) + sum_i G'_i / b_i.
double exact_objective(const Eigen::VectorXd& ratios, const AllocationInstance& instance);

/// Throws Infeasible if m * b_min > 1 and NoConverge if the Newton budget is
/// exhausted.
Allocation barrier_solve(const AllocationInstance& instance, const BarrierParams& params = {});

/// Exhaustive search over simplex points on a `step` lattice. Throws TooLarge
/// for m > 3 and ConfigError for step > 1e-3.
Allocation grid_oracle(const AllocationInstance& instance, double step);

/// Running tally of every smoothed-objective evaluation in this process and of
/// how many broke 0 <= LSE - max <= ln(m).
struct LseAudit {
    std::uint64_t evaluations = 0;
    std::uint64_t violations = 0;
};

LseAudit lse_audit();

}  // namespace fedsched

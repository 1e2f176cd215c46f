#pragma once

#include <vector>

#include "hiref/cost.hpp"
#include "hiref/dataset.hpp"

namespace hiref {

/// Entropy-regularized Kantorovich problem with optional epsilon schedule.
/// The schedule, when present, is strictly decreasing and ends at `epsilon`.
struct EntropicProblem {
    CostOracle cost;
    Vector a;
    Vector b;
    double epsilon = 0.05;
    std::vector<double> schedule;

    EntropicProblem(CostOracle c, Vector a_in, Vector b_in, double eps,
                    std::vector<double> sched = {});
};

struct DualPotentials {
    Vector f;
    Vector g;
};

struct SinkhornResult {
    DualPotentials potentials;
    double residual = 0.0;  // L1 marginal residual of the implicit plan
    Index iterations = 0;   // total full (f, g) sweeps across all levels
    bool converged = false;
};

// Log-domain Sinkhorn. The implicit plan is
//   P_ij = a_i b_j exp((f_i + g_j - C_ij) / eps),
// never materialized unless requested. With a schedule, epsilon anneals
// through the levels warm-starting the potentials. A single solve is
// sequential; callers may run many solves concurrently.
SinkhornResult sinkhorn(const EntropicProblem& problem, Index max_iters = 2000,
                        double tol = 1e-6);

/// Linear transport cost <C, P> of the implicit plan, streamed in tiles.
double entropic_cost(const EntropicProblem& problem, const DualPotentials& pot);

RowMat densify_plan(const EntropicProblem& problem, const DualPotentials& pot);

struct PlanStats {
    double entropy_shannon = 0.0;  // -sum p log p
    double entropy_eq4 = 0.0;      // -sum p (log p - 1)
    Index nonzeros = 0;            // entries > threshold
};

PlanStats plan_stats(const RowMat& plan, double threshold);
PlanStats plan_stats_streaming(const EntropicProblem& problem, const DualPotentials& pot,
                               double threshold);

/// Geometric schedule from eps0 down to eps_target (last element exactly
/// eps_target). Returns {eps_target} when eps0 <= eps_target.
std::vector<double> geometric_schedule(double eps0, double eps_target,
                                       double factor = 0.5);

/// Default schedule start: half the cost range.
double default_schedule_start(const CostOracle& cost);

}  // namespace hiref

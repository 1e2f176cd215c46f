#pragma once

#include <vector>

#include "hiref/cost.hpp"
#include "hiref/dataset.hpp"
#include "hiref/entropic.hpp"

namespace hiref {

/// Without-replacement batch pairing plus per-batch entropic potentials. The
/// implicit global plan scales batch b's plan by |batch|/n, giving uniform
/// marginals.
struct MiniBatchPlan {
    Index batch_size = 0;
    std::vector<std::pair<IndexSubset, IndexSubset>> batches;
    std::vector<DualPotentials> potentials;
    std::vector<double> batch_costs;  // linear cost <C_b, P_b> per batch
};

struct MiniBatchResult {
    MiniBatchPlan plan;
    double cost = 0.0;  // stitched global cost
};

// Randomly permutes both index sets under the seed, pairs consecutive
// B-sized batches (one remainder batch when B does not divide n), and solves
// each batch with Sinkhorn. With `relative_epsilon` (the convention of the
// reference entropic baselines) each batch runs at epsilon times its mean
// cost; otherwise epsilon is absolute. Batch index lists are kept sorted so
// a single full-size batch reduces bitwise to the plain entropic solve under
// identical solver settings.
MiniBatchResult minibatch_ot(const Dataset& X, const Dataset& Y, const CostOracle& cost,
                             Index batch_size, double epsilon, std::uint64_t seed,
                             Index sinkhorn_max_iters = 60000, double sinkhorn_tol = 1e-8,
                             int threads = 1, bool relative_epsilon = true);

/// <C, P> for a plan given as weighted index pairs, streamed.
double plan_cost_pairs(const CostOracle& cost, std::span<const Index> rows,
                       std::span<const Index> cols, std::span<const double> weights,
                       int threads = 1);

/// Stats of the stitched mini-batch plan at the given nonzero threshold.
PlanStats minibatch_plan_stats(const MiniBatchPlan& plan, const CostOracle& cost,
                               double epsilon, double threshold,
                               bool relative_epsilon = true);

/// Row and column sums of the stitched plan (for feasibility checks).
std::pair<Vector, Vector> minibatch_marginals(const MiniBatchPlan& plan,
                                              const CostOracle& cost, double epsilon,
                                              Index n, Index m,
                                              bool relative_epsilon = true);

}  // namespace hiref

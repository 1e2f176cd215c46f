#pragma once

#include <span>
#include <vector>

#include "hiref/cost.hpp"
#include "hiref/dataset.hpp"

namespace hiref {

/// Low-rank coupling factors with prescribed marginals: Q in Pi(a, g),
/// R in Pi(b, g), g fixed uniform 1/r. The coupling is Q diag(1/g) R^T.
struct CouplingFactors {
    RowMat Q;  // n x r
    RowMat R;  // m x r
    Vector g;  // uniform 1/r
};

struct LrotParams {
    double gamma = 100.0;      // epsilon = |grad|_inf / gamma per update
    int max_outer = 30;        // mirror-descent iterations
    double inner_tol = 1e-6;   // inner marginal projection tolerance (L1)
    int inner_step_iters = 300;  // sweep cap per intermediate projection
    int inner_max_iters = 4000;  // sweep cap for the final tight projections
    // Problems with more than `budget_entries` factor entries (n * r) drop
    // the intermediate cap to this sweep budget; warm starts accumulate
    // accuracy across outer iterations either way, and the returned factors
    // are projected tightly at the end.
    int inner_budget = 48;
    Index budget_entries = 16384;
    double outer_tol = 1e-6;   // relative objective decrease stop
    int threads = 1;
};

struct LrotResult {
    CouplingFactors factors;
    std::vector<double> objective_trace;  // value after each outer iteration
    bool converged = false;
    bool inner_converged = true;  // false if any inner projection hit its cap
    Index inner_sweeps = 0;       // total projection sweeps spent
    Index rejected_steps = 0;     // proposals discarded by the safeguard
};

// Mirror-descent alternating scheme for the uniform-inner-marginal low-rank
// problem: factors start as noise-perturbed product couplings, and each outer
// iteration replaces one factor by the entropic transport plan between its
// marginal pair under the linearized cost C R diag(1/g) (resp. C^T Q
// diag(1/g)), with epsilon scaled to the gradient norm and warm-started
// potentials. A step is kept only if it does not increase the objective.
LrotResult solve_lrot(const CostOracle& cost, const Vector& a, const Vector& b, Index r,
                      const LrotParams& params, std::uint64_t seed);

/// Cluster labels under exact per-cluster capacities.
struct HardAssignment {
    std::vector<int> labels;
    std::vector<Index> capacities;
};

/// Capacity-constrained rounding of one factor: points sorted by descending
/// top1-top2 margin take their argmax while capacity lasts, then the best
/// remaining cluster; one repair sweep swaps label pairs that strictly
/// increase the kept factor mass.
HardAssignment harden(const RowMat& factor, std::span<const Index> capacities);

/// Balanced capacities (floor/ceil of n/r).
std::vector<Index> balanced_capacities(Index n, Index r);

/// <C, Q diag(1/g) R^T> for the given factors.
double lrot_objective(const CostOracle& cost, const CouplingFactors& factors,
                      int threads = 1);

}  // namespace hiref

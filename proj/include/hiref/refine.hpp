#pragma once

#include <utility>
#include <vector>

#include "hiref/cost.hpp"
#include "hiref/dataset.hpp"
#include "hiref/lrot.hpp"
#include "hiref/schedule.hpp"

namespace hiref {

/// Paired index partitions of source and target at one scale. Pair q places
/// the two blocks in bijective correspondence; every pair has equal sizes.
struct CoClustering {
    Index level = 0;
    Index rho = 0;
    std::vector<std::pair<IndexSubset, IndexSubset>> pairs;
};

/// The output map: a permutation pairing each source with one target.
struct Bijection {
    std::vector<Index> perm;
    double cost = 0.0;
};

struct LevelStats {
    Index rho = 0;          // pair count entering this level
    double scale_cost = 0;  // <C, P^(t)> before refining the level
    double delta = 0;       // scale_cost(t) - scale_cost(t+1)
    double mean_diam = 0;   // sampled mean co-cluster diameter
    double ms = 0;          // wall time refining the level
};

struct RefineReport {
    std::vector<LevelStats> levels;
    double final_cost = 0.0;
    double total_ms = 0.0;
    std::size_t peak_bytes = 0;  // working set excluding the cost oracle
    std::vector<CoClustering> clusterings;  // filled when recorded
};

struct RefineParams {
    int threads = 1;
    Index diam_sample = 64;          // points per block for diameter estimates
    bool instrument = true;          // per-level scale costs and diameters
    bool record_clusterings = false; // keep the co-clustering of every level
    LrotParams lrot;
    /// Exact rank-2 split by exhaustive enumeration (test configurations,
    /// n <= 12 blocks only).
    bool brute_force_lrot = false;

    // Hardening rebalances each factor exactly, so the refinement loop keeps
    // the final projection of each block solve short.
    RefineParams() { lrot.inner_max_iters = 64; }
};

// Algorithm: at each level, every co-cluster pair is split by a balanced
// low-rank solve at rank r_{t+1} with uniform marginals and uniform inner
// marginal, both factors are hardened under equal capacities, and the
// children inherit the shared label. Blocks at or below the base size are
// matched exactly. Blocks are independent; each draws its seed from
// (master seed, level, block index) so any dispatch order gives identical
// output.
std::pair<Bijection, RefineReport> hierarchical_refine(const Dataset& X, const Dataset& Y,
                                                       const CostOracle& cost,
                                                       const RankSchedule& schedule,
                                                       const RefineParams& params,
                                                       std::uint64_t seed);

/// <C, P^(t)> for the hierarchical block-coupling of `clustering`, computed
/// blockwise without materializing the plan.
double scale_cost(const CostOracle& cost, const CoClustering& clustering,
                  int threads = 1);

/// Per-block diameter estimates: max pairwise distance over `sample` points
/// drawn from X_q union Y_q (exact when the block is smaller than the
/// sample).
std::vector<double> cocluster_diameter_sample(const Dataset& X, const Dataset& Y,
                                              const CoClustering& clustering,
                                              Index sample, std::uint64_t seed);

}  // namespace hiref

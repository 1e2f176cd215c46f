#pragma once

#include <vector>

#include "hiref/dataset.hpp"

namespace hiref {

/// Minimum-cost perfect matching with uniform weights 1/n.
struct Assignment {
    std::vector<Index> perm;  // source i -> target perm[i]
    double cost = 0.0;
};

/// Shortest-augmenting-path assignment solver, O(n^3). Ties break toward the
/// lowest target index.
Assignment hungarian(const RowMat& cost);

/// Exhaustive rank-2 balanced co-partition optimum: enumerates balanced
/// bipartitions of both sides and both block matchings, minimizing
/// <C, Q diag(1/g) R^T> over hard factors. Test oracle; n <= 12, n even.
struct BruteForceLrot {
    std::vector<int> source_labels;  // 0/1 per source point
    std::vector<int> target_labels;  // 0/1 per target point
    double objective = 0.0;
};

BruteForceLrot brute_force_lrot(const RowMat& cost);

}  // namespace hiref

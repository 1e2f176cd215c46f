#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hiref/dataset.hpp"

namespace hiref {

/// Per-level split factors (r_1..r_kappa), leaf block size `base`, and the
/// running products rho_t. ranks.size() is the hierarchy depth kappa;
/// rho_kappa * base == n_effective.
struct RankSchedule {
    std::vector<Index> ranks;
    Index base = 1;
    std::vector<Index> effective;  // rho_1..rho_kappa
    Index n_effective = 0;

    Index depth() const { return static_cast<Index>(ranks.size()); }
    /// Number of low-rank solves the refinement will perform.
    Index lrot_calls() const;
    /// Partial-sum objective the schedule optimizer minimizes
    /// (r_1 + r_1 r_2 + ... including the final leaf count).
    Index objective() const;
    /// Number of leaf blocks (each solved exactly at size `base`).
    Index leaf_solves() const;
};

/// Query caps. `depth` counts the displayed schedule length: the rank list
/// plus the base level when base > 1 (so depth 2 with a non-trivial base
/// allows one low-rank level).
struct ScheduleQuery {
    Index n = 0;
    Index depth = 1;
    Index r_max = 1;
    Index q_max = 1;
    bool trim = false;
};

struct ScheduleResult {
    RankSchedule schedule;
    Index trimmed = 0;  // points dropped when trim was needed
};

// Minimizes the number of solver runs (sum of partial rank products) over
// ordered factorizations of n/q across all base divisors q <= q_max, subject
// to rank and depth caps. Ties prefer the larger base, then the
// lexicographically smallest rank list. Throws ScheduleInfeasible when no
// schedule exists and trim is off; otherwise returns the schedule for the
// largest feasible n' <= n.
ScheduleResult optimal_schedule(const ScheduleQuery& query);

/// true iff product(ranks) * base == n with every rank >= 2 and base >= 1
/// (and within the caps when given). `diagnostics` names the first violation.
bool validate_schedule(const std::vector<Index>& ranks, Index base, Index n,
                       std::string* diagnostics = nullptr,
                       std::optional<Index> r_max = std::nullopt,
                       std::optional<Index> q_max = std::nullopt);

RankSchedule make_schedule(std::vector<Index> ranks, Index base);

}  // namespace hiref

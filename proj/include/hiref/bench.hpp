#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hiref/cost.hpp"
#include "hiref/datagen.hpp"
#include "hiref/dataset.hpp"
#include "hiref/refine.hpp"

namespace hiref {

/// Schedule and factorization policy used by the hiref bench method.
struct BenchPolicy {
    Index depth = 0;  // 0 = automatic (minimal-objective schedule)
    Index r_max = 16;
    Index q_max = 1024;
    Index cost_rank = 16;    // sampled factor rank for non-squared kernels
    double oversample = 8.0;
};

struct BenchConfig {
    Family family = Family::Checkerboard;
    std::vector<std::string> methods;  // hiref | sinkhorn | minibatch:B | exact
    std::vector<Index> sizes;
    std::vector<std::uint64_t> seeds;
    std::vector<CostKind> costs = {CostKind::Euclidean, CostKind::SqEuclidean};
    Index sinkhorn_densify_limit = Index{1} << 14;
    Index exact_limit = 2048;
    double sinkhorn_epsilon = 0.05;
    double nonzero_threshold = 1e-8;
    int threads = 1;
    BenchPolicy policy;
};

struct BenchRow {
    std::string method;
    Index n = 0;
    CostKind cost_tag = CostKind::SqEuclidean;
    double cost = 0.0;
    double entropy_shannon = 0.0;
    double entropy_eq4 = 0.0;
    Index nonzeros = 0;
    double ms = 0.0;
    std::uint64_t seed = 0;
    std::size_t peak_mem = 0;  // estimate; not part of the CSV schema
};

/// One row per (method, size, seed, cost tag); methods outside their size
/// limits are skipped. Rows run sequentially.
std::vector<BenchRow> run_bench(const BenchConfig& config);

/// Fixed schema: method,n,cost_tag,cost,entropy_shannon,entropy_eq4,nonzeros,ms,seed
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

/// Rank schedule under the policy (depth 0 resolves to the minimal-objective
/// depth).
RankSchedule bench_schedule(Index n, const BenchPolicy& policy);

/// Cost oracle the hiref method runs on: exact factors for squared Euclidean,
/// sampled factors otherwise.
CostOracle bench_cost_oracle(const Dataset& X, const Dataset& Y, CostKind kind,
                             const BenchPolicy& policy, std::uint64_t seed);

/// Process high-water resident set (VmHWM), 0 when unavailable.
std::size_t peak_rss_bytes();

}  // namespace hiref

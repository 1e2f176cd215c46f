#include "hiref/refine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>

#include "hiref/errors.hpp"
#include "hiref/exact.hpp"
#include "hiref/kernels.hpp"
#include "hiref/rng.hpp"

namespace hiref {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// High-water tracker for the refinement working set (factor matrices and
// partition arrays; the cost oracle is excluded by construction).
struct MemoryMeter {
    std::atomic<std::size_t> current{0};
    std::atomic<std::size_t> peak{0};

    void add(std::size_t bytes) {
        const std::size_t now = current.fetch_add(bytes) + bytes;
        std::size_t old = peak.load();
        while (now > old && !peak.compare_exchange_weak(old, now)) {
        }
    }
    void sub(std::size_t bytes) { current.fetch_sub(bytes); }
};

std::size_t pair_bytes(const std::vector<std::pair<IndexSubset, IndexSubset>>& pairs) {
    std::size_t b = 0;
    for (const auto& p : pairs)
        b += sizeof(Index) * (p.first.indices.size() + p.second.indices.size());
    return b;
}

// Split one co-cluster pair into `r` children with a balanced low-rank solve
// plus capacity rounding. Children are appended to fixed slots, label order.
void split_block(const CostOracle& cost, const IndexSubset& xs, const IndexSubset& ys,
                 Index r, const RefineParams& params, std::uint64_t block_seed,
                 int solver_threads,
                 std::vector<std::pair<IndexSubset, IndexSubset>>& children,
                 std::size_t child_slot) {
    const Index bn = xs.size();
    const CostOracle sub = restrict_cost(cost, xs, ys);

    std::vector<int> labels_x, labels_y;
    bool index_order = false;

    if (params.brute_force_lrot) {
        if (r != 2) throw UsageError("brute-force splits support rank 2 only");
        const BruteForceLrot best = brute_force_lrot(sub.densify());
        labels_x = best.source_labels;
        labels_y = best.target_labels;
    } else {
        LrotParams lp = params.lrot;
        lp.threads = solver_threads;
        const Vector u = uniform_weights(bn);
        LrotResult lr = solve_lrot(sub, u, u, r, lp, block_seed);

        // Constant-cost block: the objective trace is flat, every coupling is
        // optimal; split deterministically by index order.
        const auto& trace = lr.objective_trace;
        if (trace.size() >= 2) {
            const auto [mn, mx] = std::minmax_element(trace.begin(), trace.end());
            if (*mx - *mn <= 1e-12 * std::max(1.0, std::abs(*mx))) index_order = true;
        }
        if (!index_order) {
            const auto caps = balanced_capacities(bn, r);
            labels_x = harden(lr.factors.Q, caps).labels;
            labels_y = harden(lr.factors.R, caps).labels;
        }
    }

    for (Index z = 0; z < r; ++z) {
        auto& child = children[child_slot + static_cast<std::size_t>(z)];
        child.first.indices.clear();
        child.second.indices.clear();
        child.first.indices.reserve(static_cast<std::size_t>(bn / r + 1));
        child.second.indices.reserve(static_cast<std::size_t>(bn / r + 1));
    }
    if (index_order) {
        const Index per = bn / r;
        for (Index t = 0; t < bn; ++t) {
            const Index z = std::min(t / per, r - 1);
            auto& child = children[child_slot + static_cast<std::size_t>(z)];
            child.first.indices.push_back(xs.indices[static_cast<std::size_t>(t)]);
            child.second.indices.push_back(ys.indices[static_cast<std::size_t>(t)]);
        }
    } else {
        for (Index t = 0; t < bn; ++t) {
            children[child_slot + static_cast<std::size_t>(labels_x[static_cast<std::size_t>(t)])]
                .first.indices.push_back(xs.indices[static_cast<std::size_t>(t)]);
            children[child_slot + static_cast<std::size_t>(labels_y[static_cast<std::size_t>(t)])]
                .second.indices.push_back(ys.indices[static_cast<std::size_t>(t)]);
        }
    }
}

void solve_leaf(const CostOracle& cost, const IndexSubset& xs, const IndexSubset& ys,
                std::vector<Index>& perm) {
    const Index bn = xs.size();
    if (bn == 1) {
        perm[static_cast<std::size_t>(xs.indices[0])] = ys.indices[0];
        return;
    }
    const CostOracle sub = restrict_cost(cost, xs, ys);
    const Assignment a = hungarian(sub.densify());
    for (Index i = 0; i < bn; ++i)
        perm[static_cast<std::size_t>(xs.indices[static_cast<std::size_t>(i)])] =
            ys.indices[static_cast<std::size_t>(a.perm[static_cast<std::size_t>(i)])];
}

}  // namespace

double scale_cost(const CostOracle& cost, const CoClustering& clustering, int threads) {
    double total = 0.0;
    for (const auto& [xs, ys] : clustering.pairs)
        total += cost.block_sum(xs.span(), ys.span(), threads);
    const double n = static_cast<double>(cost.rows());
    return total * static_cast<double>(clustering.rho) / (n * n);
}

std::vector<double> cocluster_diameter_sample(const Dataset& X, const Dataset& Y,
                                              const CoClustering& clustering,
                                              Index sample, std::uint64_t seed) {
    if (sample < 2) throw UsageError("diameter sample must be >= 2");
    std::vector<double> out;
    out.reserve(clustering.pairs.size());
    for (std::size_t q = 0; q < clustering.pairs.size(); ++q) {
        const auto& [xs, ys] = clustering.pairs[q];
        const Index total = xs.size() + ys.size();
        std::vector<Index> pick;  // positions in the union list
        if (total <= sample) {
            pick.resize(static_cast<std::size_t>(total));
            for (Index t = 0; t < total; ++t) pick[static_cast<std::size_t>(t)] = t;
        } else {
            Rng rng(mix_seed(seed, clustering.level, static_cast<std::uint64_t>(q)));
            pick.resize(static_cast<std::size_t>(sample));
            for (Index t = 0; t < sample; ++t)
                pick[static_cast<std::size_t>(t)] =
                    static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(total)));
        }
        auto point = [&](Index u) {
            return u < xs.size()
                       ? X.points.row(xs.indices[static_cast<std::size_t>(u)])
                       : Y.points.row(ys.indices[static_cast<std::size_t>(u - xs.size())]);
        };
        double d2max = 0.0;
        for (std::size_t s = 0; s < pick.size(); ++s)
            for (std::size_t t = s + 1; t < pick.size(); ++t)
                d2max = std::max(d2max,
                                 (point(pick[s]) - point(pick[t])).squaredNorm());
        out.push_back(std::sqrt(d2max));
    }
    return out;
}

std::pair<Bijection, RefineReport> hierarchical_refine(const Dataset& X, const Dataset& Y,
                                                       const CostOracle& cost,
                                                       const RankSchedule& schedule,
                                                       const RefineParams& params,
                                                       std::uint64_t seed) {
    const Index n = X.size();
    if (Y.size() != n) throw SizeError("datasets must have equal sizes");
    if (cost.rows() != n || cost.cols() != n)
        throw SizeError("cost oracle does not cover the datasets");
    if (schedule.n_effective != n)
        throw ScheduleError("schedule n_effective does not match the dataset size");

    const auto t_start = Clock::now();
    const int threads = kernels::resolve_threads(params.threads);
    MemoryMeter meter;
    RefineReport report;

    std::vector<std::pair<IndexSubset, IndexSubset>> current(1);
    current[0].first = full_subset(n);
    current[0].second = full_subset(n);
    meter.add(pair_bytes(current));

    const Index kappa = schedule.depth();
    for (Index t = 0; t < kappa; ++t) {
        const auto t_level = Clock::now();
        const Index r = schedule.ranks[static_cast<std::size_t>(t)];
        const Index rho = static_cast<Index>(current.size());

        CoClustering gamma;
        gamma.level = t;
        gamma.rho = rho;

        LevelStats stats;
        stats.rho = rho;
        if (params.instrument || params.record_clusterings) {
            gamma.pairs = current;  // snapshot for instrumentation
            if (params.instrument) {
                stats.scale_cost = scale_cost(cost, gamma, threads);
                const auto diams =
                    cocluster_diameter_sample(X, Y, gamma, params.diam_sample, seed);
                double mean = 0.0;
                for (double d : diams) mean += d;
                stats.mean_diam = diams.empty() ? 0.0 : mean / static_cast<double>(diams.size());
            }
            if (params.record_clusterings) report.clusterings.push_back(gamma);
        }

        std::vector<std::pair<IndexSubset, IndexSubset>> next(
            static_cast<std::size_t>(rho * r));
        // Factor matrices for one block: Q and R are (block x r) doubles.
        const std::size_t factor_bytes =
            2 * static_cast<std::size_t>(n / rho) * static_cast<std::size_t>(r) * sizeof(double);

        const bool across_blocks = rho >= threads;
        const int solver_threads = across_blocks ? 1 : threads;
        std::exception_ptr block_error;
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (across_blocks && threads > 1)
        for (Index q = 0; q < rho; ++q) {
            try {
                meter.add(factor_bytes);
                const std::uint64_t block_seed = mix_seed(
                    seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(q));
                split_block(cost, current[static_cast<std::size_t>(q)].first,
                            current[static_cast<std::size_t>(q)].second, r, params,
                            block_seed, solver_threads, next,
                            static_cast<std::size_t>(q * r));
                meter.sub(factor_bytes);
            } catch (...) {
#pragma omp critical
                if (!block_error) block_error = std::current_exception();
            }
        }
        if (block_error) std::rethrow_exception(block_error);

        meter.add(pair_bytes(next));
        meter.sub(pair_bytes(current));
        current = std::move(next);
        stats.ms = ms_since(t_level);
        report.levels.push_back(stats);
    }

    // Final co-clustering (blocks of size `base`) and the exact leaves.
    const auto t_leaf = Clock::now();
    const Index leaves = static_cast<Index>(current.size());
    LevelStats leaf_stats;
    leaf_stats.rho = leaves;
    if (params.instrument || params.record_clusterings) {
        CoClustering gamma;
        gamma.level = kappa;
        gamma.rho = leaves;
        gamma.pairs = current;
        if (params.instrument) {
            leaf_stats.scale_cost = scale_cost(cost, gamma, threads);
            const auto diams =
                cocluster_diameter_sample(X, Y, gamma, params.diam_sample, seed);
            double mean = 0.0;
            for (double d : diams) mean += d;
            leaf_stats.mean_diam =
                diams.empty() ? 0.0 : mean / static_cast<double>(diams.size());
        }
        if (params.record_clusterings) report.clusterings.push_back(std::move(gamma));
    }

    Bijection bij;
    bij.perm.assign(static_cast<std::size_t>(n), -1);
    std::exception_ptr leaf_error;
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
    for (Index q = 0; q < leaves; ++q) {
        try {
            solve_leaf(cost, current[static_cast<std::size_t>(q)].first,
                       current[static_cast<std::size_t>(q)].second, bij.perm);
        } catch (...) {
#pragma omp critical
            if (!leaf_error) leaf_error = std::current_exception();
        }
    }
    if (leaf_error) std::rethrow_exception(leaf_error);

    bij.cost = kernels::sum_indexed(n, threads, [&](Index i) {
                   return cost.entry(i, bij.perm[static_cast<std::size_t>(i)]);
               }) /
               static_cast<double>(n);

    leaf_stats.ms = ms_since(t_leaf);
    report.levels.push_back(leaf_stats);

    if (params.instrument) {
        // Consecutive scale-cost differences; the step past the last
        // co-clustering lands on the bijection itself.
        for (std::size_t t = 0; t < report.levels.size(); ++t) {
            const double next_cost = (t + 1 < report.levels.size())
                                         ? report.levels[t + 1].scale_cost
                                         : bij.cost;
            report.levels[t].delta = report.levels[t].scale_cost - next_cost;
        }
    }
    report.final_cost = bij.cost;
    report.total_ms = ms_since(t_start);
    report.peak_bytes = meter.peak.load();
    return {std::move(bij), std::move(report)};
}

}  // namespace hiref

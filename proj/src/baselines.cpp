#include "hiref/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "hiref/errors.hpp"
#include "hiref/kernels.hpp"
#include "hiref/rng.hpp"

namespace hiref {

namespace {

std::vector<Index> seeded_permutation(Index n, Rng& rng) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) {
        const Index j = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

EntropicProblem batch_problem(const CostOracle& cost, const IndexSubset& xs,
                              const IndexSubset& ys, double epsilon,
                              bool relative_epsilon) {
    const Index bn = xs.size();
    CostOracle sub = restrict_cost(cost, xs, ys);
    // Batches are small; a dense batch cost keeps the inner solves fast.
    if (sub.kind() != CostOracle::Kind::Dense)
        sub = CostOracle::dense(sub.densify(), sub.tag());
    const double eps =
        relative_epsilon ? std::max(epsilon * sub.dense_matrix().mean(), 1e-12) : epsilon;
    return EntropicProblem(std::move(sub), uniform_weights(bn), uniform_weights(bn), eps);
}

}  // namespace

MiniBatchResult minibatch_ot(const Dataset& X, const Dataset& Y, const CostOracle& cost,
                             Index batch_size, double epsilon, std::uint64_t seed,
                             Index sinkhorn_max_iters, double sinkhorn_tol, int threads,
                             bool relative_epsilon) {
    const Index n = X.size();
    if (Y.size() != n) throw SizeError("datasets must have equal sizes");
    if (batch_size < 2 || batch_size > n) throw UsageError("batch size must be in [2, n]");

    MiniBatchResult res;
    res.plan.batch_size = batch_size;

    Rng rng(mix_seed(seed, 0x6d626f74ULL));
    const std::vector<Index> perm_x = seeded_permutation(n, rng);
    const std::vector<Index> perm_y = seeded_permutation(n, rng);

    for (Index lo = 0; lo < n; lo += batch_size) {
        const Index hi = std::min(n, lo + batch_size);
        IndexSubset xs, ys;
        xs.indices.assign(perm_x.begin() + lo, perm_x.begin() + hi);
        ys.indices.assign(perm_y.begin() + lo, perm_y.begin() + hi);
        std::sort(xs.indices.begin(), xs.indices.end());
        std::sort(ys.indices.begin(), ys.indices.end());
        res.plan.batches.emplace_back(std::move(xs), std::move(ys));
    }

    const Index nb = static_cast<Index>(res.plan.batches.size());
    res.plan.potentials.resize(static_cast<std::size_t>(nb));
    res.plan.batch_costs.assign(static_cast<std::size_t>(nb), 0.0);

    threads = kernels::resolve_threads(threads);
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
    for (Index b = 0; b < nb; ++b) {
        const auto& [xs, ys] = res.plan.batches[static_cast<std::size_t>(b)];
        EntropicProblem prob = batch_problem(cost, xs, ys, epsilon, relative_epsilon);
        SinkhornResult sr = sinkhorn(prob, sinkhorn_max_iters, sinkhorn_tol);
        res.plan.batch_costs[static_cast<std::size_t>(b)] = entropic_cost(prob, sr.potentials);
        res.plan.potentials[static_cast<std::size_t>(b)] = std::move(sr.potentials);
    }

    double total = 0.0;
    for (Index b = 0; b < nb; ++b) {
        const double bsz =
            static_cast<double>(res.plan.batches[static_cast<std::size_t>(b)].first.size());
        total += bsz / static_cast<double>(n) *
                 res.plan.batch_costs[static_cast<std::size_t>(b)];
    }
    res.cost = total;
    return res;
}

double plan_cost_pairs(const CostOracle& cost, std::span<const Index> rows,
                       std::span<const Index> cols, std::span<const double> weights,
                       int threads) {
    if (rows.size() != cols.size() || rows.size() != weights.size())
        throw DimensionError("plan pair lists must have equal lengths");
    return kernels::sum_indexed(static_cast<Index>(rows.size()), threads, [&](Index t) {
        const auto s = static_cast<std::size_t>(t);
        return weights[s] * cost.entry(rows[s], cols[s]);
    });
}

namespace {

template <class Consume>
void stream_minibatch(const MiniBatchPlan& plan, const CostOracle& cost, double epsilon,
                      Index n, bool relative_epsilon, Consume&& consume) {
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
        const auto& [xs, ys] = plan.batches[b];
        const double scale = static_cast<double>(xs.size()) / static_cast<double>(n);
        const EntropicProblem prob = batch_problem(cost, xs, ys, epsilon, relative_epsilon);
        const RowMat P = densify_plan(prob, plan.potentials[b]);
        for (Index i = 0; i < P.rows(); ++i)
            for (Index j = 0; j < P.cols(); ++j)
                consume(xs.indices[static_cast<std::size_t>(i)],
                        ys.indices[static_cast<std::size_t>(j)], scale * P(i, j));
    }
}

}  // namespace

PlanStats minibatch_plan_stats(const MiniBatchPlan& plan, const CostOracle& cost,
                               double epsilon, double threshold, bool relative_epsilon) {
    PlanStats s;
    stream_minibatch(plan, cost, epsilon, cost.rows(), relative_epsilon,
                     [&](Index, Index, double p) {
        if (p > threshold) ++s.nonzeros;
        if (p > 0.0) {
            const double lp = std::log(p);
            s.entropy_shannon -= p * lp;
            s.entropy_eq4 -= p * (lp - 1.0);
        }
    });
    return s;
}

std::pair<Vector, Vector> minibatch_marginals(const MiniBatchPlan& plan,
                                              const CostOracle& cost, double epsilon,
                                              Index n, Index m, bool relative_epsilon) {
    Vector rows = Vector::Zero(n), cols = Vector::Zero(m);
    stream_minibatch(plan, cost, epsilon, n, relative_epsilon,
                     [&](Index i, Index j, double p) {
        rows(i) += p;
        cols(j) += p;
    });
    return {rows, cols};
}

}  // namespace hiref

#include "hiref/entropic.hpp"

#include <algorithm>
#include <cmath>

#include "hiref/errors.hpp"
#include "hiref/kernels.hpp"

namespace hiref {

namespace {

void check_marginal(const Vector& w, Index expect, const char* name) {
    if (w.size() != expect) throw DimensionError(std::string(name) + ": wrong length");
    if (w.minCoeff() < 0.0) throw NumericalError(std::string(name) + ": negative weight");
    if (std::abs(w.sum() - 1.0) > 1e-12)
        throw NumericalError(std::string(name) + ": does not sum to 1");
}

Vector safe_log(const Vector& w) {
    Vector out(w.size());
    for (Index i = 0; i < w.size(); ++i)
        out(i) = w(i) > 0.0 ? std::log(w(i)) : -std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace

EntropicProblem::EntropicProblem(CostOracle c, Vector a_in, Vector b_in, double eps,
                                 std::vector<double> sched)
    : cost(std::move(c)), a(std::move(a_in)), b(std::move(b_in)), epsilon(eps),
      schedule(std::move(sched)) {
    check_marginal(a, cost.rows(), "a");
    check_marginal(b, cost.cols(), "b");
    if (epsilon <= 0.0) throw NumericalError("epsilon must be positive");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] >= schedule[i - 1])
            throw NumericalError("epsilon schedule must be strictly decreasing");
    if (!schedule.empty() &&
        std::abs(schedule.back() - epsilon) > 1e-12 * std::max(1.0, epsilon))
        throw NumericalError("epsilon schedule must end at epsilon");
}

namespace {

// One half-sweep: out_i = -eps * lse_j(shift_j - C_ij / eps). `transposed`
// switches to the column direction. Solves run single-threaded (callers
// parallelize across solves, not within one).
void half_sweep(const CostOracle& cost, const Vector& shift, double eps, bool transposed,
                Vector& out) {
    if (!transposed) {
        if (cost.kind() == CostOracle::Kind::Dense) {
            kernels::softmin_rows(cost.dense_matrix(), shift, eps, out, 1);
        } else {
            kernels::softmin_rows_eval(
                cost.rows(), cost.cols(),
                [&](Index i, Index j0, Index j1, double* buf) {
                    cost.row_segment(i, j0, j1, buf);
                },
                shift, eps, out, 1);
        }
    } else {
        if (cost.kind() == CostOracle::Kind::Dense) {
            kernels::softmin_cols(cost.dense_matrix(), shift, eps, out, 1);
        } else {
            kernels::softmin_cols_eval(
                cost.rows(), cost.cols(),
                [&](Index i, Index j0, Index j1, double* buf) {
                    cost.row_segment(i, j0, j1, buf);
                },
                shift, eps, out, 1);
        }
    }
}

double weighted_delta_residual(const Vector& w, const Vector& cur, const Vector& next,
                               double eps) {
    // Marginal sums of the implicit plan equal w_i * exp((cur_i - next_i)/eps),
    // so the L1 violation falls out of the potential update itself.
    double r = 0.0;
    for (Index i = 0; i < w.size(); ++i)
        r += w(i) * std::abs(std::expm1((cur(i) - next(i)) / eps));
    return r;
}

}  // namespace

SinkhornResult sinkhorn(const EntropicProblem& problem, Index max_iters, double tol) {
    if (max_iters < 1) throw UsageError("max_iters must be >= 1");
    const Index n = problem.cost.rows(), m = problem.cost.cols();
    const Vector loga = safe_log(problem.a), logb = safe_log(problem.b);

    SinkhornResult res;
    res.potentials.f = Vector::Zero(n);
    res.potentials.g = Vector::Zero(m);
    Vector& f = res.potentials.f;
    Vector& g = res.potentials.g;
    Vector fnext(n), gnext(m), shift(std::max(n, m));

    std::vector<double> levels = problem.schedule;
    if (levels.empty()) levels.push_back(problem.epsilon);

    for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
        const double eps = levels[lvl];
        // Intermediate levels only warm-start the next one; a handful of
        // sweeps each is enough, the final level runs to tolerance.
        const bool last = lvl + 1 == levels.size();
        const double level_tol = last ? tol : std::max(tol, 1e-2);
        const Index level_cap = last ? max_iters : std::min<Index>(max_iters, 6);
        bool level_done = false;
        for (Index it = 0; it < level_cap && !level_done; ++it) {
            Vector col_shift = logb + g / eps;
            half_sweep(problem.cost, col_shift, eps, false, fnext);
            const double row_res = weighted_delta_residual(problem.a, f, fnext, eps);
            f = fnext;

            Vector row_shift = loga + f / eps;
            half_sweep(problem.cost, row_shift, eps, true, gnext);
            const double col_res = weighted_delta_residual(problem.b, g, gnext, eps);
            g = gnext;

            ++res.iterations;
            if (!f.allFinite() || !g.allFinite())
                throw NumericalError("sinkhorn potentials diverged (non-finite cost?)");
            level_done = row_res <= level_tol && col_res <= level_tol;
        }
    }

    // Residual of the returned plan: after the final g sweep the column
    // marginals are exact; measure the rows with one extra half-sweep.
    const double eps = problem.epsilon;
    Vector col_shift = logb + g / eps;
    half_sweep(problem.cost, col_shift, eps, false, fnext);
    res.residual = weighted_delta_residual(problem.a, f, fnext, eps);
    res.converged = res.residual <= tol;
    return res;
}

namespace {

template <class Consume>
void stream_plan(const EntropicProblem& problem, const DualPotentials& pot,
                 Consume&& consume) {
    const Index n = problem.cost.rows(), m = problem.cost.cols();
    const double inv_eps = 1.0 / problem.epsilon;
    const Vector loga = safe_log(problem.a), logb = safe_log(problem.b);
    const Index tile = std::max<Index>(1, std::min<Index>(m, 1 << 14));
    std::vector<double> buf(static_cast<std::size_t>(tile));
    for (Index i = 0; i < n; ++i) {
        const double base = loga(i) + pot.f(i) * inv_eps;
        for (Index j0 = 0; j0 < m; j0 += tile) {
            const Index j1 = std::min(m, j0 + tile);
            problem.cost.row_segment(i, j0, j1, buf.data());
            for (Index j = j0; j < j1; ++j) {
                const double c = buf[static_cast<std::size_t>(j - j0)];
                const double p =
                    std::exp(base + logb(j) + (pot.g(j) - c) * inv_eps);
                consume(i, j, p, c);
            }
        }
    }
}

}  // namespace

double entropic_cost(const EntropicProblem& problem, const DualPotentials& pot) {
    double total = 0.0;
    stream_plan(problem, pot,
                [&](Index, Index, double p, double c) { total += p * c; });
    return total;
}

RowMat densify_plan(const EntropicProblem& problem, const DualPotentials& pot) {
    RowMat P(problem.cost.rows(), problem.cost.cols());
    stream_plan(problem, pot, [&](Index i, Index j, double p, double) { P(i, j) = p; });
    return P;
}

namespace {

void accumulate_stats(double p, double threshold, PlanStats& s) {
    if (p > threshold) ++s.nonzeros;
    if (p > 0.0) {
        const double lp = std::log(p);
        s.entropy_shannon -= p * lp;
        s.entropy_eq4 -= p * (lp - 1.0);
    }
}

}  // namespace

PlanStats plan_stats(const RowMat& plan, double threshold) {
    PlanStats s;
    for (Index i = 0; i < plan.rows(); ++i)
        for (Index j = 0; j < plan.cols(); ++j) accumulate_stats(plan(i, j), threshold, s);
    return s;
}

PlanStats plan_stats_streaming(const EntropicProblem& problem, const DualPotentials& pot,
                               double threshold) {
    PlanStats s;
    stream_plan(problem, pot,
                [&](Index, Index, double p, double) { accumulate_stats(p, threshold, s); });
    return s;
}

std::vector<double> geometric_schedule(double eps0, double eps_target, double factor) {
    if (eps_target <= 0.0) throw NumericalError("eps_target must be positive");
    if (factor <= 0.0 || factor >= 1.0) throw UsageError("factor must be in (0, 1)");
    std::vector<double> out;
    double e = eps0;
    while (e > eps_target * (1.0 + 1e-12)) {
        out.push_back(e);
        e *= factor;
    }
    out.push_back(eps_target);
    return out;
}

double default_schedule_start(const CostOracle& cost) {
    auto [lo, hi] = cost.value_range();
    return 0.5 * std::max(hi - lo, 1e-12);
}

}  // namespace hiref

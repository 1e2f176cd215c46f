#include "hiref/lrot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hiref/errors.hpp"
#include "hiref/kernels.hpp"
#include "hiref/rng.hpp"

namespace hiref {

namespace {

void check_weights(const Vector& w, Index expect, const char* name) {
    if (w.size() != expect) throw DimensionError(std::string(name) + ": wrong length");
    if (w.minCoeff() <= 0.0)
        throw NumericalError(std::string(name) + ": weights must be positive");
    if (std::abs(w.sum() - 1.0) > 1e-9)
        throw NumericalError(std::string(name) + ": does not sum to 1");
}

// Alternating row/column rescaling of a positive matrix onto marginals
// (row sums w_r, column sums w_c).
void ras_balance(RowMat& M, const Vector& wr, const Vector& wc, double tol = 1e-12,
                 int max_iters = 200) {
    for (int it = 0; it < max_iters; ++it) {
        for (Index i = 0; i < M.rows(); ++i) {
            const double s = M.row(i).sum();
            if (s > 0.0) M.row(i) *= wr(i) / s;
        }
        double err = 0.0;
        for (Index z = 0; z < M.cols(); ++z) {
            const double s = M.col(z).sum();
            if (s > 0.0) M.col(z) *= wc(z) / s;
            err += std::abs(s - wc(z));
        }
        if (err <= tol) break;
    }
}

// Log-domain entropic projection onto Pi(a, g) under dense cost D (n x r).
// Potentials are warm-started across calls; the column half-sweep runs on a
// transposed copy so both directions use the vectorized row kernel. Returns
// the L1 marginal residual of the produced plan.
struct InnerProjection {
    Vector f;  // length n
    Vector h;  // length r
    bool warm = false;

    Index sweeps = 0;

    double solve(const RowMat& D, const Vector& a, const Vector& loga, const Vector& g,
                 const Vector& logg, double eps, double tol, int max_iters, RowMat& plan,
                 bool& hit_cap, int threads) {
        const Index n = D.rows(), r = D.cols();
        if (!warm) {
            f = Vector::Zero(n);
            h = Vector::Zero(r);
            warm = true;
        }
        const RowMat Dt = D.transpose();
        const double inv_eps = 1.0 / eps;
        Vector fnext(n), hnext(r);
        double row_res = std::numeric_limits<double>::infinity();
        double col_res = row_res;
        hit_cap = true;
        for (int it = 0; it < max_iters; ++it) {
            ++sweeps;
            // Both half-sweeps run on the transposed cost: rows of Dt are
            // contiguous length-n arrays, which keeps the exp loops vector
            // friendly even at small rank.
            const Vector col_shift = logg + h * inv_eps;
            kernels::softmin_cols(Dt, col_shift, eps, fnext, threads);
            row_res = 0.0;
            for (Index i = 0; i < n; ++i)
                row_res += a(i) * std::abs(std::expm1((f(i) - fnext(i)) * inv_eps));
            f.swap(fnext);

            const Vector row_shift = loga + f * inv_eps;
            kernels::softmin_rows(Dt, row_shift, eps, hnext, threads);
            col_res = 0.0;
            for (Index z = 0; z < r; ++z)
                col_res += g(z) * std::abs(std::expm1((h(z) - hnext(z)) * inv_eps));
            h.swap(hnext);

            if (row_res <= tol && col_res <= tol) {
                hit_cap = false;
                break;
            }
        }
        if (!f.allFinite() || !h.allFinite())
            throw NumericalError("inner projection diverged");

        plan.resize(n, r);
        kernels::for_rows(n, threads, [&](Index i) {
            const double base = loga(i) + f(i) * inv_eps;
            for (Index z = 0; z < r; ++z)
                plan(i, z) = std::exp(base + logg(z) + (h(z) - D(i, z)) * inv_eps);
        });
        return std::max(row_res, col_res);
    }
};

double frob_inner(const RowMat& A, const RowMat& B, int threads) {
    return kernels::sum_indexed(A.rows(), threads,
                                [&](Index i) { return A.row(i).dot(B.row(i)); });
}

Vector log_vec(const Vector& w) {
    Vector out(w.size());
    for (Index i = 0; i < w.size(); ++i) out(i) = std::log(w(i));
    return out;
}

}  // namespace

std::vector<Index> balanced_capacities(Index n, Index r) {
    std::vector<Index> caps(static_cast<std::size_t>(r), n / r);
    for (Index z = 0; z < n % r; ++z) ++caps[static_cast<std::size_t>(z)];
    return caps;
}

double lrot_objective(const CostOracle& cost, const CouplingFactors& factors,
                      int threads) {
    RowMat CR;
    cost.apply_right(factors.R, CR, threads);
    const double r = static_cast<double>(factors.g.size());
    return r * frob_inner(factors.Q, CR, threads);
}

LrotResult solve_lrot(const CostOracle& cost, const Vector& a, const Vector& b, Index r,
                      const LrotParams& params, std::uint64_t seed) {
    const Index n = cost.rows(), m = cost.cols();
    if (r < 2) throw RankError("rank must be >= 2");
    if (r > std::min(n, m)) throw RankError("rank exceeds min(n, m)");
    check_weights(a, n, "a");
    check_weights(b, m, "b");

    const Vector g = Vector::Constant(r, 1.0 / static_cast<double>(r));
    const Vector loga = log_vec(a), logb = log_vec(b), logg = log_vec(g);
    const double rscale = static_cast<double>(r);  // diag(1/g) = r * I

    // Perturbed product couplings re-balanced onto their marginals.
    Rng rng(mix_seed(seed, 0x6c726f74ULL));
    RowMat Q(n, r), R(m, r);
    for (Index i = 0; i < n; ++i)
        for (Index z = 0; z < r; ++z) Q(i, z) = a(i) * g(z) * rng.next_uniform(0.9, 1.1);
    for (Index j = 0; j < m; ++j)
        for (Index z = 0; z < r; ++z) R(j, z) = b(j) * g(z) * rng.next_uniform(0.9, 1.1);
    ras_balance(Q, a, g);
    ras_balance(R, b, g);

    LrotResult res;
    InnerProjection proj_q, proj_r;
    RowMat gradQ, gradR, candidate;
    double eps_q = 0.0, eps_r = 0.0;  // epsilon of the last accepted step

    // One linearized step: the objective is linear in the active factor, so a
    // proposal is kept only if it does not increase <factor, grad>, backing
    // off epsilon otherwise. Returns true on strict improvement.
    auto mirror_step = [&](RowMat& factor, const RowMat& grad, const Vector& w,
                           const Vector& logw, InnerProjection& proj, int sweep_cap,
                           double& eps_used) {
        const double g_norm = grad.cwiseAbs().maxCoeff();
        if (g_norm <= 0.0) return false;
        double eps = g_norm / params.gamma;
        const double lin_old = frob_inner(factor, grad, params.threads);
        for (int attempt = 0; attempt < 3; ++attempt) {
            bool cap = false;
            proj.solve(grad, w, logw, g, logg, eps, params.inner_tol, sweep_cap,
                       candidate, cap, params.threads);
            if (cap) res.inner_converged = false;
            const double lin_new = frob_inner(candidate, grad, params.threads);
            if (lin_new <= lin_old + 1e-12 * (1.0 + std::abs(lin_old))) {
                factor.swap(candidate);
                eps_used = eps;
                return lin_new < lin_old - 1e-15 * (1.0 + std::abs(lin_old));
            }
            ++res.rejected_steps;
            eps *= 0.125;
        }
        return false;
    };

    cost.apply_right(R, gradQ, params.threads);
    gradQ *= rscale;
    double obj = frob_inner(Q, gradQ, params.threads);
    res.objective_trace.push_back(obj);

    // Intermediate projections on large problems run on a small sweep
    // budget; warm-started potentials keep them accurate enough to rank
    // proposals, and the final projections restore tight marginals.
    const Index entries = std::max(n, m) * r;
    const bool budgeted = entries > params.budget_entries;
    int step_cap = budgeted ? params.inner_budget : params.inner_step_iters;
    if (entries > (Index{1} << 22)) step_cap = std::max(8, params.inner_budget / 2);
    for (int outer = 0; outer < params.max_outer; ++outer) {
        bool progress = mirror_step(Q, gradQ, a, loga, proj_q, step_cap, eps_q);

        cost.apply_left(Q, gradR, params.threads);
        gradR *= rscale;
        progress = mirror_step(R, gradR, b, logb, proj_r, step_cap, eps_r) || progress;

        cost.apply_right(R, gradQ, params.threads);
        gradQ *= rscale;
        const double prev = res.objective_trace.back();
        obj = frob_inner(Q, gradQ, params.threads);
        res.objective_trace.push_back(obj);

        if (!progress ||
            std::abs(prev - obj) <= params.outer_tol * std::max(1.0, std::abs(prev))) {
            res.converged = true;
            break;
        }
    }

    // Final tight projections wherever the budgeted phase left a factor off
    // its marginals; the projection is the entropic argmin of the current
    // linearized objective, accepted as the feasible representative. Failure
    // to reach tolerance is flagged, not fatal.
    // Entrywise violation of the marginal contract.
    auto marginal_residual = [](const RowMat& M, const Vector& w, const Vector& gg) {
        const Vector rows = M.rowwise().sum(), cols = M.colwise().sum();
        double worst = 0.0;
        for (Index i = 0; i < rows.size(); ++i)
            worst = std::max(worst, std::abs(rows(i) - w(i)));
        for (Index z = 0; z < cols.size(); ++z)
            worst = std::max(worst, std::abs(cols(z) - gg(z)));
        return worst;
    };
    res.inner_converged = true;
    bool polished = false;
    if (eps_q > 0.0 && marginal_residual(Q, a, g) > params.inner_tol) {
        // Continue the projection that produced the accepted factor, at the
        // same epsilon, until its marginals meet tolerance.
        bool cap = false;
        proj_q.solve(gradQ, a, loga, g, logg, eps_q, params.inner_tol,
                     params.inner_max_iters, Q, cap, params.threads);
        if (cap) res.inner_converged = false;
        polished = true;
    }
    cost.apply_left(Q, gradR, params.threads);
    gradR *= rscale;
    if (eps_r > 0.0 && marginal_residual(R, b, g) > params.inner_tol) {
        bool cap = false;
        proj_r.solve(gradR, b, logb, g, logg, eps_r, params.inner_tol,
                     params.inner_max_iters, R, cap, params.threads);
        if (cap) res.inner_converged = false;
        polished = true;
    }
    if (polished) {
        cost.apply_right(R, gradQ, params.threads);
        gradQ *= rscale;
        res.objective_trace.push_back(frob_inner(Q, gradQ, params.threads));
    }

    res.inner_sweeps = proj_q.sweeps + proj_r.sweeps;
    res.factors.Q = std::move(Q);
    res.factors.R = std::move(R);
    res.factors.g = g;
    return res;
}

HardAssignment harden(const RowMat& factor, std::span<const Index> capacities) {
    const Index n = factor.rows();
    const Index r = factor.cols();
    if (static_cast<Index>(capacities.size()) != r)
        throw CapacityError("capacity list length must equal the factor rank");
    Index total = 0;
    for (Index c : capacities) {
        if (c < 0) throw CapacityError("negative capacity");
        total += c;
    }
    if (total != n) throw CapacityError("capacities must sum to the point count");

    struct Entry {
        Index i;
        int want;
        double margin;
    };
    std::vector<Entry> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        int best = 0;
        double top1 = -std::numeric_limits<double>::infinity();
        double top2 = top1;
        for (Index z = 0; z < r; ++z) {
            const double v = factor(i, z);
            if (v > top1) {
                top2 = top1;
                top1 = v;
                best = static_cast<int>(z);
            } else if (v > top2) {
                top2 = v;
            }
        }
        order[static_cast<std::size_t>(i)] = {i, best, r > 1 ? top1 - top2 : top1};
    }
    std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
        if (a.margin != b.margin) return a.margin > b.margin;
        return a.i < b.i;
    });

    HardAssignment out;
    out.capacities.assign(capacities.begin(), capacities.end());
    out.labels.assign(static_cast<std::size_t>(n), -1);
    std::vector<Index> remaining(capacities.begin(), capacities.end());
    for (const Entry& e : order) {
        int z = e.want;
        if (remaining[static_cast<std::size_t>(z)] <= 0) {
            z = -1;
            double best = -std::numeric_limits<double>::infinity();
            for (Index c = 0; c < r; ++c) {
                if (remaining[static_cast<std::size_t>(c)] <= 0) continue;
                if (factor(e.i, c) > best) {
                    best = factor(e.i, c);
                    z = static_cast<int>(c);
                }
            }
        }
        out.labels[static_cast<std::size_t>(e.i)] = z;
        --remaining[static_cast<std::size_t>(z)];
    }

    // Repair sweep: points that missed their argmax, in descending order of
    // the mass they gave up, swap with the best partner in their wanted
    // cluster when the exchange strictly increases total kept mass.
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(r));
    for (Index i = 0; i < n; ++i)
        members[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])].push_back(i);

    struct Mis {
        Index i;
        int want;
        double loss;
    };
    std::vector<Mis> misassigned;
    for (const Entry& e : order) {
        const int got = out.labels[static_cast<std::size_t>(e.i)];
        if (got != e.want)
            misassigned.push_back({e.i, e.want, factor(e.i, e.want) - factor(e.i, got)});
    }
    std::sort(misassigned.begin(), misassigned.end(), [](const Mis& a, const Mis& b) {
        if (a.loss != b.loss) return a.loss > b.loss;
        return a.i < b.i;
    });

    for (const Mis& msp : misassigned) {
        const int zi = out.labels[static_cast<std::size_t>(msp.i)];
        const int w = msp.want;
        if (zi == w) continue;  // already fixed by an earlier swap
        double best_gain = 0.0;
        Index best_j = -1;
        for (Index j : members[static_cast<std::size_t>(w)]) {
            const double gain = (factor(msp.i, w) + factor(j, zi)) -
                                (factor(msp.i, zi) + factor(j, w));
            if (gain > best_gain + 1e-15 || (best_j == -1 && gain > 0.0)) {
                best_gain = gain;
                best_j = j;
            }
        }
        if (best_j >= 0 && best_gain > 0.0) {
            auto& from = members[static_cast<std::size_t>(w)];
            from.erase(std::find(from.begin(), from.end(), best_j));
            members[static_cast<std::size_t>(zi)].push_back(best_j);
            auto& mine = members[static_cast<std::size_t>(zi)];
            mine.erase(std::find(mine.begin(), mine.end(), msp.i));
            members[static_cast<std::size_t>(w)].push_back(msp.i);
            out.labels[static_cast<std::size_t>(best_j)] = zi;
            out.labels[static_cast<std::size_t>(msp.i)] = w;
        }
    }
    return out;
}

}  // namespace hiref

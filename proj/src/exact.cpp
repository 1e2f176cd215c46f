#include "hiref/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hiref/errors.hpp"

namespace hiref {

Assignment hungarian(const RowMat& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw ShapeError("assignment cost must be square");
    if (!cost.allFinite()) throw NumericalError("assignment cost has non-finite entries");

    const double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays; row potentials u, column potentials v, p[j] = row
    // matched to column j, way[j] = previous column on the augmenting path.
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<Index> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> way(static_cast<std::size_t>(n) + 1, 0);

    for (Index i = 1; i <= n; ++i) {
        p[0] = i;
        Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = p[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    Assignment out;
    out.perm.assign(static_cast<std::size_t>(n), 0);
    for (Index j = 1; j <= n; ++j)
        out.perm[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += cost(i, out.perm[static_cast<std::size_t>(i)]);
    out.cost = total / static_cast<double>(n);
    return out;
}

namespace {

// Sum of C over A x B for label masks.
double block_sum(const RowMat& C, const std::vector<int>& src, const std::vector<int>& tgt,
                 int a, int b) {
    double s = 0.0;
    for (Index i = 0; i < C.rows(); ++i) {
        if (src[static_cast<std::size_t>(i)] != a) continue;
        for (Index j = 0; j < C.cols(); ++j)
            if (tgt[static_cast<std::size_t>(j)] == b) s += C(i, j);
    }
    return s;
}

void enumerate_bipartitions(Index n, std::vector<std::vector<int>>& out) {
    // All balanced 0/1 labelings with element 0 fixed in block 0 (the
    // complementary labeling is covered by the matching flip).
    std::vector<int> labels(static_cast<std::size_t>(n), 1);
    std::vector<Index> pick;
    const Index half = n / 2;
    auto rec = [&](auto&& self, Index start, Index chosen) -> void {
        if (chosen == half) {
            out.push_back(labels);
            return;
        }
        for (Index i = start; i < n; ++i) {
            if (n - i < half - chosen) break;
            labels[static_cast<std::size_t>(i)] = 0;
            self(self, i + 1, chosen + 1);
            labels[static_cast<std::size_t>(i)] = 1;
        }
    };
    labels[0] = 0;
    rec(rec, 1, 1);
}

}  // namespace

BruteForceLrot brute_force_lrot(const RowMat& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw ShapeError("brute_force_lrot needs a square cost");
    if (n > 12) throw TooLargeError("brute_force_lrot limited to n <= 12");
    if (n % 2 != 0) throw ShapeError("brute_force_lrot needs even n");

    std::vector<std::vector<int>> src_parts, tgt_parts_fixed;
    enumerate_bipartitions(n, src_parts);
    // Target side enumerates both labelings via the matching flip below, so
    // the same fixed-element enumeration covers everything.
    tgt_parts_fixed = src_parts;

    const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n));
    BruteForceLrot best;
    best.objective = std::numeric_limits<double>::infinity();
    for (const auto& src : src_parts) {
        for (const auto& tgt : tgt_parts_fixed) {
            const double s00 = block_sum(cost, src, tgt, 0, 0);
            const double s11 = block_sum(cost, src, tgt, 1, 1);
            const double s01 = block_sum(cost, src, tgt, 0, 1);
            const double s10 = block_sum(cost, src, tgt, 1, 0);
            const double direct = scale * (s00 + s11);
            const double flipped = scale * (s01 + s10);
            if (direct < best.objective) {
                best.objective = direct;
                best.source_labels = src;
                best.target_labels = tgt;
            }
            if (flipped < best.objective) {
                best.objective = flipped;
                best.source_labels = src;
                best.target_labels = tgt;
                for (auto& l : best.target_labels) l = 1 - l;
            }
        }
    }
    return best;
}

}  // namespace hiref

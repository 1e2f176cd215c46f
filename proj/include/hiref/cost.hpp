#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hiref/dataset.hpp"

namespace hiref {

enum class CostKind { Euclidean, SqEuclidean };

const char* cost_kind_name(CostKind k);
CostKind cost_kind_from_name(const std::string& name);

/// Ordered, duplicate-free positions into a dataset.
struct IndexSubset {
    std::vector<Index> indices;

    Index size() const { return static_cast<Index>(indices.size()); }
    std::span<const Index> span() const { return indices; }
};

IndexSubset full_subset(Index n);
void check_subset(std::span<const Index> idx, Index n);

// Cost access in one of three forms: a dense matrix, a factored pair (U, V)
// with C ~= U V^T, or an on-the-fly kernel over two point sets. All forms are
// immutable after construction and cheap to copy (shared storage).
class CostOracle {
public:
    enum class Kind { Dense, Factored, Kernel };

    static CostOracle dense(RowMat C, CostKind tag = CostKind::SqEuclidean);
    static CostOracle factored(RowMat U, RowMat V, CostKind tag);
    static CostOracle kernel(std::shared_ptr<const Dataset> X,
                             std::shared_ptr<const Dataset> Y, CostKind tag);
    static CostOracle kernel(Dataset X, Dataset Y, CostKind tag);

    Kind kind() const { return kind_; }
    CostKind tag() const { return tag_; }
    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    /// Single entry; factored reconstructions are clamped at zero.
    double entry(Index i, Index j) const;

    /// Fills out[0 .. j1-j0) with row i over columns [j0, j1).
    void row_segment(Index i, Index j0, Index j1, double* out) const;

    RowMat densify(int threads = 1) const;

    /// min and max entry; exact for Dense, otherwise estimated from a seeded
    /// sample of entries (used only for epsilon scaling heuristics).
    std::pair<double, double> value_range(std::uint64_t seed = 0) const;

    // Accessors for the dense form.
    const RowMat& dense_matrix() const;

    // Accessors for the factored form.
    const RowMat& factor_u() const;
    const RowMat& factor_v() const;

    // Accessors for the kernel form.
    const Dataset& kernel_x() const;
    const Dataset& kernel_y() const;

    // Gradient products for the low-rank solver: right(M) = C * M and
    // left(M) = C^T * M, without materializing C for Factored/Kernel forms.
    void apply_right(const RowMat& M, RowMat& out, int threads = 1) const;
    void apply_left(const RowMat& M, RowMat& out, int threads = 1) const;

    /// Total of all entries in the rectangle rows x cols (used by the
    /// per-scale cost instrumentation). Factored form uses the
    /// (sum of U rows) . (sum of V rows) contraction.
    double block_sum(std::span<const Index> rows, std::span<const Index> cols,
                     int threads = 1) const;

private:
    CostOracle() = default;

    Kind kind_ = Kind::Dense;
    CostKind tag_ = CostKind::SqEuclidean;
    Index rows_ = 0, cols_ = 0;
    std::shared_ptr<const RowMat> dense_;
    std::shared_ptr<const RowMat> u_, v_;
    std::shared_ptr<const Dataset> x_, y_;
};

/// Sub-problem extraction: the returned oracle evaluates the selected pairs.
CostOracle restrict_cost(const CostOracle& oracle, const IndexSubset& rows,
                         const IndexSubset& cols);

/// Exact squared-Euclidean factorization with k = d + 2:
/// U row = [|x|^2, 1, -2x], V row = [1, |y|^2, y].
CostOracle factor_sqeuclidean(const Dataset& X, const Dataset& Y);

/// Sampled low-rank factorization of a metric cost matrix: rows are sampled
/// proportionally to a reference-anchored probability, rescaled, and the
/// top-`rank` right singular subspace of the sketch gives V; U is fit by
/// ridge-regularized least squares against a symmetric column sample.
/// Deterministic given the seed.
CostOracle factor_metric_sampled(const Dataset& X, const Dataset& Y, Index rank,
                                 double oversample, std::uint64_t seed,
                                 CostKind tag = CostKind::Euclidean);

}  // namespace hiref

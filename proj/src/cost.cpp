#include "hiref/cost.hpp"

#include <algorithm>
#include <cmath>

#include "hiref/errors.hpp"
#include "hiref/kernels.hpp"
#include "hiref/rng.hpp"

namespace hiref {

const char* cost_kind_name(CostKind k) {
    return k == CostKind::Euclidean ? "euclidean" : "sqeuclidean";
}

CostKind cost_kind_from_name(const std::string& name) {
    if (name == "euclidean") return CostKind::Euclidean;
    if (name == "sqeuclidean") return CostKind::SqEuclidean;
    throw UsageError("unknown cost kind '" + name + "'");
}

IndexSubset full_subset(Index n) {
    IndexSubset s;
    s.indices.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) s.indices[static_cast<std::size_t>(i)] = i;
    return s;
}

void check_subset(std::span<const Index> idx, Index n) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Index i : idx) {
        if (i < 0 || i >= n) throw InvalidSubset("subset index out of range");
        if (seen[static_cast<std::size_t>(i)]) throw InvalidSubset("duplicate subset index");
        seen[static_cast<std::size_t>(i)] = true;
    }
}

CostOracle CostOracle::dense(RowMat C, CostKind tag) {
    if (!C.allFinite()) throw NumericalError("dense cost has non-finite entries");
    if (C.minCoeff() < 0.0) throw NumericalError("dense cost has negative entries");
    CostOracle o;
    o.kind_ = Kind::Dense;
    o.tag_ = tag;
    o.rows_ = C.rows();
    o.cols_ = C.cols();
    o.dense_ = std::make_shared<const RowMat>(std::move(C));
    return o;
}

CostOracle CostOracle::factored(RowMat U, RowMat V, CostKind tag) {
    if (U.cols() != V.cols()) throw DimensionError("factor widths differ");
    if (!U.allFinite() || !V.allFinite())
        throw NumericalError("cost factors have non-finite entries");
    CostOracle o;
    o.kind_ = Kind::Factored;
    o.tag_ = tag;
    o.rows_ = U.rows();
    o.cols_ = V.rows();
    o.u_ = std::make_shared<const RowMat>(std::move(U));
    o.v_ = std::make_shared<const RowMat>(std::move(V));
    return o;
}

CostOracle CostOracle::kernel(std::shared_ptr<const Dataset> X,
                              std::shared_ptr<const Dataset> Y, CostKind tag) {
    if (X->dim() != Y->dim()) throw DimensionError("point sets have different dimension");
    CostOracle o;
    o.kind_ = Kind::Kernel;
    o.tag_ = tag;
    o.rows_ = X->size();
    o.cols_ = Y->size();
    o.x_ = std::move(X);
    o.y_ = std::move(Y);
    return o;
}

CostOracle CostOracle::kernel(Dataset X, Dataset Y, CostKind tag) {
    return kernel(std::make_shared<const Dataset>(std::move(X)),
                  std::make_shared<const Dataset>(std::move(Y)), tag);
}

double CostOracle::entry(Index i, Index j) const {
    switch (kind_) {
        case Kind::Dense:
            return (*dense_)(i, j);
        case Kind::Factored:
            return std::max(0.0, u_->row(i).dot(v_->row(j)));
        case Kind::Kernel: {
            const double s = kernels::sq_dist(x_->points.row(i).data(),
                                              y_->points.row(j).data(), x_->dim());
            return tag_ == CostKind::SqEuclidean ? s : std::sqrt(s);
        }
    }
    return 0.0;
}

void CostOracle::row_segment(Index i, Index j0, Index j1, double* out) const {
    switch (kind_) {
        case Kind::Dense: {
            const double* src = dense_->row(i).data();
            std::copy(src + j0, src + j1, out);
            break;
        }
        case Kind::Factored: {
            const auto ui = u_->row(i);
            for (Index j = j0; j < j1; ++j)
                out[j - j0] = std::max(0.0, ui.dot(v_->row(j)));
            break;
        }
        case Kind::Kernel:
            kernels::cost_row_segment(x_->points, y_->points,
                                      tag_ == CostKind::SqEuclidean, i, j0, j1, out);
            break;
    }
}

RowMat CostOracle::densify(int threads) const {
    RowMat C(rows_, cols_);
    kernels::for_rows(rows_, threads,
                      [&](Index i) { row_segment(i, 0, cols_, C.row(i).data()); });
    return C;
}

std::pair<double, double> CostOracle::value_range(std::uint64_t seed) const {
    if (kind_ == Kind::Dense) return {dense_->minCoeff(), dense_->maxCoeff()};
    Rng rng(mix_seed(seed, 0x72616e6765ULL));
    const Index samples = std::min<Index>(rows_ * cols_, 4096);
    double lo = entry(0, 0), hi = lo;
    for (Index s = 0; s < samples; ++s) {
        const double v = entry(static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(rows_))),
                               static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(cols_))));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

const RowMat& CostOracle::dense_matrix() const {
    if (kind_ != Kind::Dense) throw UsageError("not a dense cost");
    return *dense_;
}

const RowMat& CostOracle::factor_u() const {
    if (kind_ != Kind::Factored) throw UsageError("not a factored cost");
    return *u_;
}

const RowMat& CostOracle::factor_v() const {
    if (kind_ != Kind::Factored) throw UsageError("not a factored cost");
    return *v_;
}

const Dataset& CostOracle::kernel_x() const {
    if (kind_ != Kind::Kernel) throw UsageError("not a kernel cost");
    return *x_;
}

const Dataset& CostOracle::kernel_y() const {
    if (kind_ != Kind::Kernel) throw UsageError("not a kernel cost");
    return *y_;
}

void CostOracle::apply_right(const RowMat& M, RowMat& out, int threads) const {
    if (M.rows() != cols_) throw DimensionError("apply_right shape mismatch");
    switch (kind_) {
        case Kind::Dense:
            kernels::matmul(*dense_, M, out, threads);
            break;
        case Kind::Factored: {
            RowMat W = v_->transpose() * M;  // k x r, small
            kernels::matmul(*u_, W, out, threads);
            break;
        }
        case Kind::Kernel: {
            out.resize(rows_, M.cols());
            kernels::for_rows(rows_, threads, [&](Index i) {
                thread_local std::vector<double> buf;
                buf.resize(static_cast<std::size_t>(cols_));
                row_segment(i, 0, cols_, buf.data());
                Eigen::Map<const Eigen::RowVectorXd> row(buf.data(), cols_);
                out.row(i).noalias() = row * M;
            });
            break;
        }
    }
}

void CostOracle::apply_left(const RowMat& M, RowMat& out, int threads) const {
    if (M.rows() != rows_) throw DimensionError("apply_left shape mismatch");
    switch (kind_) {
        case Kind::Dense: {
            out.resize(cols_, M.cols());
            kernels::for_rows(cols_, threads, [&](Index j) {
                out.row(j).noalias() = dense_->col(j).transpose() * M;
            });
            break;
        }
        case Kind::Factored: {
            RowMat W = u_->transpose() * M;  // k x r
            kernels::matmul(*v_, W, out, threads);
            break;
        }
        case Kind::Kernel: {
            // C^T M for the symmetric kernel over swapped point sets.
            out.resize(cols_, M.cols());
            kernels::for_rows(cols_, threads, [&](Index j) {
                thread_local std::vector<double> buf;
                buf.resize(static_cast<std::size_t>(rows_));
                kernels::cost_row_segment(y_->points, x_->points,
                                          tag_ == CostKind::SqEuclidean, j, 0, rows_,
                                          buf.data());
                Eigen::Map<const Eigen::RowVectorXd> col(buf.data(), rows_);
                out.row(j).noalias() = col * M;
            });
            break;
        }
    }
}

double CostOracle::block_sum(std::span<const Index> rows, std::span<const Index> cols,
                             int threads) const {
    if (kind_ == Kind::Factored) {
        Eigen::RowVectorXd su = Eigen::RowVectorXd::Zero(u_->cols());
        for (Index i : rows) su += u_->row(i);
        Eigen::RowVectorXd sv = Eigen::RowVectorXd::Zero(v_->cols());
        for (Index j : cols) sv += v_->row(j);
        return su.dot(sv);
    }
    const Index nr = static_cast<Index>(rows.size());
    return kernels::sum_indexed(nr, threads, [&](Index r) {
        const Index i = rows[static_cast<std::size_t>(r)];
        double s = 0.0;
        for (Index j : cols) s += entry(i, j);
        return s;
    });
}

CostOracle restrict_cost(const CostOracle& oracle, const IndexSubset& rows,
                         const IndexSubset& cols) {
    check_subset(rows.span(), oracle.rows());
    check_subset(cols.span(), oracle.cols());
    switch (oracle.kind()) {
        case CostOracle::Kind::Dense: {
            RowMat C(rows.size(), cols.size());
            for (Index r = 0; r < rows.size(); ++r)
                for (Index c = 0; c < cols.size(); ++c)
                    C(r, c) = oracle.entry(rows.indices[static_cast<std::size_t>(r)],
                                           cols.indices[static_cast<std::size_t>(c)]);
            return CostOracle::dense(std::move(C), oracle.tag());
        }
        case CostOracle::Kind::Factored: {
            const RowMat& U = oracle.factor_u();
            const RowMat& V = oracle.factor_v();
            RowMat Ur(rows.size(), U.cols());
            for (Index r = 0; r < rows.size(); ++r)
                Ur.row(r) = U.row(rows.indices[static_cast<std::size_t>(r)]);
            RowMat Vr(cols.size(), V.cols());
            for (Index c = 0; c < cols.size(); ++c)
                Vr.row(c) = V.row(cols.indices[static_cast<std::size_t>(c)]);
            return CostOracle::factored(std::move(Ur), std::move(Vr), oracle.tag());
        }
        case CostOracle::Kind::Kernel: {
            // Kernel oracles keep their point sets; restriction copies the
            // selected points (O(|subset| d)).
            return CostOracle::kernel(gather(oracle.kernel_x(), rows.span()),
                                      gather(oracle.kernel_y(), cols.span()),
                                      oracle.tag());
        }
    }
    throw Error("unreachable");
}

CostOracle factor_sqeuclidean(const Dataset& X, const Dataset& Y) {
    if (X.dim() != Y.dim()) throw DimensionError("point sets have different dimension");
    const int d = X.dim();
    RowMat U(X.size(), d + 2), V(Y.size(), d + 2);
    for (Index i = 0; i < X.size(); ++i) {
        U(i, 0) = X.points.row(i).squaredNorm();
        U(i, 1) = 1.0;
        U.row(i).segment(2, d) = -2.0 * X.points.row(i);
    }
    for (Index j = 0; j < Y.size(); ++j) {
        V(j, 0) = 1.0;
        V(j, 1) = Y.points.row(j).squaredNorm();
        V.row(j).segment(2, d) = Y.points.row(j);
    }
    return CostOracle::factored(std::move(U), std::move(V), CostKind::SqEuclidean);
}

namespace {

// Anchored sampling probabilities over the rows of C (columns when the roles
// of X and Y are swapped by the caller): p_i = C(i,j*)^2 + C(i*,j*)^2 +
// mean_j C(i*,j)^2.
Vector sample_probabilities(const CostOracle& oracle, Index i_star, Index j_star) {
    const Index n = oracle.rows(), m = oracle.cols();
    std::vector<double> anchor_row(static_cast<std::size_t>(m));
    oracle.row_segment(i_star, 0, m, anchor_row.data());
    double anchor_mean_sq = 0.0;
    for (double v : anchor_row) anchor_mean_sq += v * v;
    anchor_mean_sq /= static_cast<double>(m);
    const double pivot = anchor_row[static_cast<std::size_t>(j_star)];
    Vector p(n);
    for (Index i = 0; i < n; ++i) {
        const double c = oracle.entry(i, j_star);
        p(i) = c * c + pivot * pivot + anchor_mean_sq;
    }
    const double total = p.sum();
    if (total <= 0.0)
        p.setConstant(1.0 / static_cast<double>(n));
    else
        p /= total;
    return p;
}

std::vector<Index> draw_categorical(const Vector& p, Index count, Rng& rng) {
    // Inverse CDF draws; cdf is tiny compared to the sketch work.
    Vector cdf(p.size());
    double acc = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
        acc += p(i);
        cdf(i) = acc;
    }
    std::vector<Index> out(static_cast<std::size_t>(count));
    for (Index s = 0; s < count; ++s) {
        const double u = rng.next_uniform() * acc;
        const double* lo = cdf.data();
        const double* it = std::lower_bound(lo, lo + cdf.size(), u);
        out[static_cast<std::size_t>(s)] =
            std::min<Index>(static_cast<Index>(it - lo), p.size() - 1);
    }
    return out;
}

}  // namespace

CostOracle factor_metric_sampled(const Dataset& X, const Dataset& Y, Index rank,
                                 double oversample, std::uint64_t seed, CostKind tag) {
    if (X.dim() != Y.dim()) throw DimensionError("point sets have different dimension");
    const Index n = X.size(), m = Y.size();
    if (rank < 1 || rank > std::min(n, m))
        throw RankError("rank must be in [1, min(n, m)]");

    auto oracle = CostOracle::kernel(std::make_shared<const Dataset>(X),
                                     std::make_shared<const Dataset>(Y), tag);

    Rng rng(mix_seed(seed, 0x6661637472ULL));
    const Index i_star = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n)));
    const Index j_star = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(m)));

    const Index s_rows = std::max<Index>(
        rank, static_cast<Index>(std::llround(oversample * static_cast<double>(rank))));

    // Row sketch S: sampled rows rescaled by 1/sqrt(s q_i). The sketch is
    // never held whole; it is re-evaluated in column tiles, first to form the
    // s x s Gram matrix, then to project out the right singular subspace.
    const Vector p_rows = sample_probabilities(oracle, i_star, j_star);
    const std::vector<Index> rows = draw_categorical(p_rows, s_rows, rng);
    Vector row_scale(s_rows);
    for (Index s = 0; s < s_rows; ++s)
        row_scale(s) = 1.0 / std::sqrt(static_cast<double>(s_rows) *
                                       p_rows(rows[static_cast<std::size_t>(s)]));

    const Index tile = std::max<Index>(Index{1}, std::min<Index>(m, (1 << 22) / std::max<Index>(s_rows, 1)));
    auto eval_sketch_tile = [&](Index j0, Index j1, RowMat& buf) {
        buf.resize(s_rows, j1 - j0);
        for (Index s = 0; s < s_rows; ++s) {
            oracle.row_segment(rows[static_cast<std::size_t>(s)], j0, j1, buf.row(s).data());
            buf.row(s) *= row_scale(s);
        }
    };

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(s_rows, s_rows);
    {
        RowMat buf;
        for (Index j0 = 0; j0 < m; j0 += tile) {
            eval_sketch_tile(j0, std::min(m, j0 + tile), buf);
            gram.noalias() += buf * buf.transpose();
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    // Columns of E scaled by 1/singular value map S^T into the top right
    // singular subspace; eigenvalues ascend, take the trailing `rank`.
    Eigen::MatrixXd proj(s_rows, rank);
    const double lam_max = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    for (Index k = 0; k < rank; ++k) {
        const Index src = s_rows - 1 - k;
        const double lam = eig.eigenvalues()(src);
        if (lam > lam_max * 1e-13 && lam > 0.0)
            proj.col(k) = eig.eigenvectors().col(src) / std::sqrt(lam);
        else
            proj.col(k).setZero();
    }
    RowMat V(m, rank);
    {
        RowMat buf;
        for (Index j0 = 0; j0 < m; j0 += tile) {
            const Index j1 = std::min(m, j0 + tile);
            eval_sketch_tile(j0, j1, buf);
            V.middleRows(j0, j1 - j0).noalias() = buf.transpose() * proj;
        }
    }

    // Symmetric column sample for the U fit.
    auto transposed = CostOracle::kernel(std::make_shared<const Dataset>(Y),
                                         std::make_shared<const Dataset>(X), tag);
    const Vector p_cols = sample_probabilities(transposed, j_star, i_star);
    const Index s_cols = s_rows;
    const std::vector<Index> cols = draw_categorical(p_cols, s_cols, rng);

    // Ridge least squares row by row: U_i = argmin |t_i - W u|^2 + lambda|u|^2
    // with t_i the scaled sampled entries of row i and W the matching scaled
    // rows of V.
    RowMat W(s_cols, rank);
    Vector col_scale(s_cols);
    for (Index s = 0; s < s_cols; ++s) {
        const Index j = cols[static_cast<std::size_t>(s)];
        col_scale(s) = 1.0 / std::sqrt(static_cast<double>(s_cols) * p_cols(j));
        W.row(s) = V.row(j) * col_scale(s);
    }
    Eigen::MatrixXd G = W.transpose() * W;
    const double ridge = 1e-10 * std::max(G.trace(), 1e-300);
    G.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> lschol(G);
    RowMat U(n, rank);
    Vector t(s_cols);
    for (Index i = 0; i < n; ++i) {
        for (Index s = 0; s < s_cols; ++s)
            t(s) = oracle.entry(i, cols[static_cast<std::size_t>(s)]) * col_scale(s);
        U.row(i) = lschol.solve(W.transpose() * t).transpose();
    }
    return CostOracle::factored(std::move(U), std::move(V), tag);
}

}  // namespace hiref

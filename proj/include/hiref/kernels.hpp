#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hiref/dataset.hpp"

// Data-parallel inner loops, each as a serial reference plus an OpenMP
// variant. The OpenMP variants partition work so every output element is
// produced by exactly one thread with the same inner accumulation order as
// the serial code, and scalar reductions run over fixed-size chunks folded
// serially. Results are therefore bitwise identical for any thread count;
// tests and tools/bench_kernels rely on that.

namespace hiref::kernels {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// requested <= 0 selects the OpenMP default.
inline int resolve_threads(int requested) {
    return requested <= 0 ? max_threads() : requested;
}

constexpr Index kChunk = 8192;

// ---------------------------------------------------------------------------
// Deterministic reductions
// ---------------------------------------------------------------------------

template <class Fn>
double sum_indexed_serial(Index n, Fn&& f) {
    const Index nchunks = (n + kChunk - 1) / kChunk;
    double total = 0.0;
    for (Index c = 0; c < nchunks; ++c) {
        const Index lo = c * kChunk, hi = std::min(n, lo + kChunk);
        double part = 0.0;
        for (Index i = lo; i < hi; ++i) part += f(i);
        total += part;
    }
    return total;
}

template <class Fn>
double sum_indexed_omp(Index n, int threads, Fn&& f) {
    const Index nchunks = (n + kChunk - 1) / kChunk;
    std::vector<double> parts(static_cast<std::size_t>(nchunks), 0.0);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Index c = 0; c < nchunks; ++c) {
        const Index lo = c * kChunk, hi = std::min(n, lo + kChunk);
        double part = 0.0;
        for (Index i = lo; i < hi; ++i) part += f(i);
        parts[static_cast<std::size_t>(c)] = part;
    }
    double total = 0.0;
    for (double p : parts) total += p;
    return total;
}

template <class Fn>
double sum_indexed(Index n, int threads, Fn&& f) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n < 2 * kChunk) return sum_indexed_serial(n, f);
    return sum_indexed_omp(n, threads, f);
}

inline double sum_serial(const double* x, Index n) {
    return sum_indexed_serial(n, [&](Index i) { return x[i]; });
}

inline double sum_omp(const double* x, Index n, int threads) {
    return sum_indexed_omp(n, threads, [&](Index i) { return x[i]; });
}

inline double sum(const double* x, Index n, int threads) {
    return sum_indexed(n, threads, [&](Index i) { return x[i]; });
}

inline double dot(const double* a, const double* b, Index n, int threads) {
    return sum_indexed(n, threads, [&](Index i) { return a[i] * b[i]; });
}

// ---------------------------------------------------------------------------
// Row-parallel loops
// ---------------------------------------------------------------------------

template <class Fn>
void for_rows_serial(Index n, Fn&& f) {
    for (Index i = 0; i < n; ++i) f(i);
}

template <class Fn>
void for_rows_omp(Index n, int threads, Fn&& f) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Index i = 0; i < n; ++i) f(i);
}

template <class Fn>
void for_rows(Index n, int threads, Fn&& f) {
    threads = resolve_threads(threads);
    if (threads <= 1)
        for_rows_serial(n, f);
    else
        for_rows_omp(n, threads, f);
}

// ---------------------------------------------------------------------------
// Tall-skinny product: out (n x r) = A (n x k) * W (k x r)
// ---------------------------------------------------------------------------

inline void matmul_serial(const RowMat& A, const RowMat& W, RowMat& out) {
    out.resize(A.rows(), W.cols());
    for (Index i = 0; i < A.rows(); ++i) out.row(i).noalias() = A.row(i) * W;
}

inline void matmul_omp(const RowMat& A, const RowMat& W, RowMat& out, int threads) {
    out.resize(A.rows(), W.cols());
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Index i = 0; i < A.rows(); ++i) out.row(i).noalias() = A.row(i) * W;
}

inline void matmul(const RowMat& A, const RowMat& W, RowMat& out, int threads) {
    threads = resolve_threads(threads);
    if (threads <= 1)
        matmul_serial(A, W, out);
    else
        matmul_omp(A, W, out, threads);
}

// ---------------------------------------------------------------------------
// Streaming log-sum-exp
// ---------------------------------------------------------------------------

struct RunningLse {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;

    void add(double v) {
        if (v == -std::numeric_limits<double>::infinity()) return;  // zero weight
        if (v > max) {
            sum = sum * std::exp(max - v) + 1.0;
            max = v;
        } else {
            sum += std::exp(v - max);
        }
    }

    double value() const {
        return std::isinf(max) ? max : max + std::log(sum);
    }
};

using ArrayXd = Eigen::ArrayXd;

/// -eps * lse_j(shift_j - row_j / eps) over one contiguous row, vectorized
/// two-pass through a caller-provided buffer of length m. Rows too short for
/// the vector machinery to pay off take a scalar path.
inline double row_softmin(const double* row, const Vector& shift, Index m, double eps,
                          ArrayXd& buf) {
    const double inv_eps = 1.0 / eps;
    if (m <= 24) {
        double vals[24];
        double mx = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < m; ++j) {
            vals[j] = shift(j) - row[j] * inv_eps;
            if (vals[j] > mx) mx = vals[j];
        }
        if (mx == -std::numeric_limits<double>::infinity()) return -eps * mx;
        double total = 0.0;
        for (Index j = 0; j < m; ++j) total += std::exp(vals[j] - mx);
        return -eps * (mx + std::log(total));
    }
    Eigen::Map<const ArrayXd> r(row, m);
    buf = shift.array() - r * inv_eps;
    const double mx = buf.maxCoeff();
    if (mx == -std::numeric_limits<double>::infinity()) return -eps * mx;
    const double total = (buf - mx).exp().sum();
    return -eps * (mx + std::log(total));
}

// Sinkhorn half-step on a dense cost matrix:
//   f_i = -eps * lse_j( shift_j - C_ij / eps )   with shift_j = logw_j + g_j/eps
inline void softmin_rows_serial(const RowMat& C, const Vector& shift, double eps,
                                Vector& f) {
    f.resize(C.rows());
    ArrayXd buf(C.cols());
    for (Index i = 0; i < C.rows(); ++i)
        f(i) = row_softmin(C.row(i).data(), shift, C.cols(), eps, buf);
}

inline void softmin_rows_omp(const RowMat& C, const Vector& shift, double eps,
                             Vector& f, int threads) {
    f.resize(C.rows());
#pragma omp parallel num_threads(threads)
    {
        ArrayXd buf(C.cols());
#pragma omp for schedule(static)
        for (Index i = 0; i < C.rows(); ++i)
            f(i) = row_softmin(C.row(i).data(), shift, C.cols(), eps, buf);
    }
}

inline void softmin_rows(const RowMat& C, const Vector& shift, double eps, Vector& f,
                         int threads) {
    threads = resolve_threads(threads);
    if (threads <= 1)
        softmin_rows_serial(C, shift, eps, f);
    else
        softmin_rows_omp(C, shift, eps, f, threads);
}

// Column half-step on a row-major dense matrix, one column strip at a time:
// a max pass then an exp-sum pass, both walking rows so the per-column
// reduction order is row order whatever the strip layout.
inline void softmin_cols_strip(const RowMat& C, const Vector& shift, double eps,
                               Index j0, Index j1, double* out) {
    const Index w = j1 - j0;
    const double inv_eps = 1.0 / eps;
    ArrayXd mx = ArrayXd::Constant(w, -std::numeric_limits<double>::infinity());
    ArrayXd seg(w), sums(w);
    for (Index i = 0; i < C.rows(); ++i) {
        Eigen::Map<const ArrayXd> row(C.row(i).data() + j0, w);
        seg = shift(i) - row * inv_eps;
        mx = mx.max(seg);
    }
    sums.setZero();
    for (Index i = 0; i < C.rows(); ++i) {
        Eigen::Map<const ArrayXd> row(C.row(i).data() + j0, w);
        seg = shift(i) - row * inv_eps;
        sums += (seg - mx).exp();
    }
    for (Index j = 0; j < w; ++j)
        out[j] = std::isinf(mx(j)) ? -eps * mx(j) : -eps * (mx(j) + std::log(sums(j)));
}

constexpr Index kColStrip = 2048;

inline void softmin_cols_serial(const RowMat& C, const Vector& shift, double eps,
                                Vector& g) {
    const Index m = C.cols();
    g.resize(m);
    for (Index j0 = 0; j0 < m; j0 += kColStrip)
        softmin_cols_strip(C, shift, eps, j0, std::min(m, j0 + kColStrip), g.data() + j0);
}

inline void softmin_cols_omp(const RowMat& C, const Vector& shift, double eps,
                             Vector& g, int threads) {
    const Index m = C.cols();
    g.resize(m);
    const Index nstrips = (m + kColStrip - 1) / kColStrip;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Index s = 0; s < nstrips; ++s) {
        const Index j0 = s * kColStrip, j1 = std::min(m, j0 + kColStrip);
        softmin_cols_strip(C, shift, eps, j0, j1, g.data() + j0);
    }
}

inline void softmin_cols(const RowMat& C, const Vector& shift, double eps, Vector& g,
                         int threads) {
    threads = resolve_threads(threads);
    if (threads <= 1)
        softmin_cols_serial(C, shift, eps, g);
    else
        softmin_cols_omp(C, shift, eps, g, threads);
}

// Generic variants for costs evaluated on the fly. RowEval has signature
// eval(i, j0, j1, double* buf) filling buf with C(i, j0:j1).

template <class RowEval>
void softmin_rows_eval(Index n, Index m, RowEval&& eval, const Vector& shift,
                       double eps, Vector& f, int threads, Index tile = 4096) {
    const double inv_eps = 1.0 / eps;
    f.resize(n);
    for_rows(n, threads, [&](Index i) {
        thread_local std::vector<double> buf;
        buf.resize(static_cast<std::size_t>(std::min(tile, m)));
        RunningLse lse;
        for (Index j0 = 0; j0 < m; j0 += tile) {
            const Index j1 = std::min(m, j0 + tile);
            eval(i, j0, j1, buf.data());
            for (Index j = j0; j < j1; ++j)
                lse.add(shift(j) - buf[static_cast<std::size_t>(j - j0)] * inv_eps);
        }
        f(i) = -eps * lse.value();
    });
}

template <class RowEval>
void softmin_cols_eval(Index n, Index m, RowEval&& eval, const Vector& shift,
                       double eps, Vector& g, int threads, Index strip = 2048) {
    threads = resolve_threads(threads);
    const Index nstrips = (m + strip - 1) / strip;
    g.resize(m);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
    for (Index s = 0; s < nstrips; ++s) {
        const Index j0 = s * strip, j1 = std::min(m, j0 + strip);
        std::vector<RunningLse> acc(static_cast<std::size_t>(j1 - j0));
        std::vector<double> buf(static_cast<std::size_t>(j1 - j0));
        const double inv_eps = 1.0 / eps;
        for (Index i = 0; i < n; ++i) {
            eval(i, j0, j1, buf.data());
            const double si = shift(i);
            for (Index j = j0; j < j1; ++j)
                acc[static_cast<std::size_t>(j - j0)].add(
                    si - buf[static_cast<std::size_t>(j - j0)] * inv_eps);
        }
        for (Index j = j0; j < j1; ++j)
            g(j) = -eps * acc[static_cast<std::size_t>(j - j0)].value();
    }
}

// ---------------------------------------------------------------------------
// Pairwise costs
// ---------------------------------------------------------------------------

inline double sq_dist(const double* x, const double* y, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        const double t = x[k] - y[k];
        s += t * t;
    }
    return s;
}

/// One row segment of a pairwise cost matrix; squared == false gives the
/// Euclidean distance.
inline void cost_row_segment(const RowMat& X, const RowMat& Y, bool squared, Index i,
                             Index j0, Index j1, double* out) {
    const int d = static_cast<int>(X.cols());
    const double* x = X.row(i).data();
    for (Index j = j0; j < j1; ++j) {
        const double s = sq_dist(x, Y.row(j).data(), d);
        out[j - j0] = squared ? s : std::sqrt(s);
    }
}

inline void cost_tile_serial(const RowMat& X, const RowMat& Y, bool squared, Index i0,
                             Index i1, Index j0, Index j1, double* out) {
    const Index w = j1 - j0;
    for (Index i = i0; i < i1; ++i)
        cost_row_segment(X, Y, squared, i, j0, j1, out + (i - i0) * w);
}

inline void cost_tile_omp(const RowMat& X, const RowMat& Y, bool squared, Index i0,
                          Index i1, Index j0, Index j1, double* out, int threads) {
    const Index w = j1 - j0;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Index i = i0; i < i1; ++i)
        cost_row_segment(X, Y, squared, i, j0, j1, out + (i - i0) * w);
}

inline void cost_tile(const RowMat& X, const RowMat& Y, bool squared, Index i0,
                      Index i1, Index j0, Index j1, double* out, int threads) {
    threads = resolve_threads(threads);
    if (threads <= 1)
        cost_tile_serial(X, Y, squared, i0, i1, j0, j1, out);
    else
        cost_tile_omp(X, Y, squared, i0, i1, j0, j1, out, threads);
}

}  // namespace hiref::kernels

#include <doctest.h>

#include "hiref/kernels.hpp"
#include "hiref/rng.hpp"

using namespace hiref;

namespace {

RowMat random_matrix(Index n, Index m, std::uint64_t seed) {
    Rng rng(seed);
    RowMat M(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) M(i, j) = rng.next_uniform(-1.0, 3.0);
    return M;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("omp variants match serial bitwise") {
    const Index n = 403, m = 257;
    RowMat C = random_matrix(n, m, 11);
    Vector shift_m = random_matrix(m, 1, 12).col(0);
    Vector shift_n = random_matrix(n, 1, 13).col(0);

    for (int threads : {2, 3, 7}) {
        CAPTURE(threads);

        Vector f1, f2;
        kernels::softmin_rows_serial(C, shift_m, 0.03, f1);
        kernels::softmin_rows_omp(C, shift_m, 0.03, f2, threads);
        CHECK(f1 == f2);

        Vector g1, g2;
        kernels::softmin_cols_serial(C, shift_n, 0.03, g1);
        kernels::softmin_cols_omp(C, shift_n, 0.03, g2, threads);
        CHECK(g1 == g2);

        RowMat W = random_matrix(m, 5, 14), o1, o2;
        kernels::matmul_serial(C, W, o1);
        kernels::matmul_omp(C, W, o2, threads);
        CHECK(o1 == o2);

        const double s1 = kernels::sum_serial(C.data(), n * m);
        const double s2 = kernels::sum_omp(C.data(), n * m, threads);
        CHECK(s1 == s2);

        RowMat X = random_matrix(64, 3, 15), Y = random_matrix(50, 3, 16);
        RowMat t1(64, 50), t2(64, 50);
        kernels::cost_tile_serial(X, Y, true, 0, 64, 0, 50, t1.data());
        kernels::cost_tile_omp(X, Y, true, 0, 64, 0, 50, t2.data(), threads);
        CHECK(t1 == t2);
    }
}

TEST_CASE("streaming lse matches two-pass computation") {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const Index m = 1 + static_cast<Index>(rng.next_below(64));
        Vector v(m);
        for (Index j = 0; j < m; ++j) v(j) = rng.next_uniform(-40.0, 40.0);
        kernels::RunningLse lse;
        for (Index j = 0; j < m; ++j) lse.add(v(j));
        const double mx = v.maxCoeff();
        const double ref = mx + std::log((v.array() - mx).exp().sum());
        CHECK(lse.value() == doctest::Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("softmin matches direct formula") {
    const Index n = 17, m = 23;
    RowMat C = random_matrix(n, m, 31);
    Vector shift = random_matrix(m, 1, 32).col(0);
    const double eps = 0.07;
    Vector f;
    kernels::softmin_rows_serial(C, shift, eps, f);
    for (Index i = 0; i < n; ++i) {
        double acc = 0.0;
        const double mx = (shift.transpose().array() - C.row(i).array() / eps).maxCoeff();
        for (Index j = 0; j < m; ++j) acc += std::exp(shift(j) - C(i, j) / eps - mx);
        const double expect = -eps * (mx + std::log(acc));
        CHECK(f(i) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("eval variants agree with dense variants") {
    const Index n = 61, m = 97;
    RowMat C = random_matrix(n, m, 41);
    Vector shift_m = random_matrix(m, 1, 42).col(0);
    Vector shift_n = random_matrix(n, 1, 43).col(0);
    auto eval = [&](Index i, Index j0, Index j1, double* buf) {
        for (Index j = j0; j < j1; ++j) buf[j - j0] = C(i, j);
    };

    Vector f1, f2;
    kernels::softmin_rows_serial(C, shift_m, 0.2, f1);
    kernels::softmin_rows_eval(n, m, eval, shift_m, 0.2, f2, 1, /*tile=*/16);
    CHECK(f1.isApprox(f2, 1e-15));

    Vector g1, g2;
    kernels::softmin_cols_serial(C, shift_n, 0.2, g1);
    kernels::softmin_cols_eval(n, m, eval, shift_n, 0.2, g2, 1, /*strip=*/8);
    CHECK(g1.isApprox(g2, 1e-15));
}

TEST_SUITE_END();

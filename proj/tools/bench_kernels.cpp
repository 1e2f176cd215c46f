// Times the serial reference kernels against their OpenMP variants and
// verifies the outputs agree bitwise. Usage: bench_kernels [threads].

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "hiref/kernels.hpp"
#include "hiref/rng.hpp"

using namespace hiref;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
    fn();  // warm up
    const auto t0 = Clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() /
           repeats;
}

RowMat random_matrix(Index n, Index m, Rng& rng) {
    RowMat M(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) M(i, j) = rng.next_uniform();
    return M;
}

void report(const char* name, double serial_ms, double omp_ms, bool match) {
    std::printf("%-18s serial %9.3f ms   omp %9.3f ms   spearate %5.2fx   bitwise %s\n",
                name, serial_ms, omp_ms, serial_ms / omp_ms, match ? "OK" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : kernels::max_threads();
    std::printf("threads: %d\n", threads);
    Rng rng(7);

    {
        const Index n = 1 << 21;
        RowMat x = random_matrix(n, 1, rng);
        double a = 0, b = 0;
        const double ts = time_ms([&] { a = kernels::sum_serial(x.data(), n); }, 5);
        const double tp = time_ms([&] { b = kernels::sum_omp(x.data(), n, threads); }, 5);
        report("chunked_sum", ts, tp, a == b);
    }
    {
        const Index n = 1 << 15, k = 16, r = 8;
        RowMat A = random_matrix(n, k, rng), W = random_matrix(k, r, rng);
        RowMat o1, o2;
        const double ts = time_ms([&] { kernels::matmul_serial(A, W, o1); }, 5);
        const double tp = time_ms([&] { kernels::matmul_omp(A, W, o2, threads); }, 5);
        report("matmul_tall", ts, tp, o1 == o2);
    }
    {
        const Index n = 2048, m = 2048;
        RowMat C = random_matrix(n, m, rng);
        Vector shift = random_matrix(m, 1, rng).col(0);
        Vector f1, f2;
        const double ts = time_ms([&] { kernels::softmin_rows_serial(C, shift, 0.1, f1); }, 3);
        const double tp =
            time_ms([&] { kernels::softmin_rows_omp(C, shift, 0.1, f2, threads); }, 3);
        report("softmin_rows", ts, tp, f1 == f2);
    }
    {
        const Index n = 2048, m = 2048;
        RowMat C = random_matrix(n, m, rng);
        Vector shift = random_matrix(n, 1, rng).col(0);
        Vector g1, g2;
        const double ts = time_ms([&] { kernels::softmin_cols_serial(C, shift, 0.1, g1); }, 3);
        const double tp =
            time_ms([&] { kernels::softmin_cols_omp(C, shift, 0.1, g2, threads); }, 3);
        report("softmin_cols", ts, tp, g1 == g2);
    }
    {
        const Index n = 1024, m = 1024;
        RowMat X = random_matrix(n, 2, rng), Y = random_matrix(m, 2, rng);
        RowMat t1(n, m), t2(n, m);
        const double ts =
            time_ms([&] { kernels::cost_tile_serial(X, Y, false, 0, n, 0, m, t1.data()); }, 3);
        const double tp = time_ms(
            [&] { kernels::cost_tile_omp(X, Y, false, 0, n, 0, m, t2.data(), threads); }, 3);
        report("cost_tile", ts, tp, t1 == t2);
    }
    return 0;
}

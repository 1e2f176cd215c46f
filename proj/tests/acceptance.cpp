// Acceptance suite: one pass/fail line per criterion. Each criterion states
// its tolerance inline; a failure prints the offending numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "hiref/baselines.hpp"
#include "hiref/bench.hpp"
#include "hiref/datagen.hpp"
#include "hiref/entropic.hpp"
#include "hiref/errors.hpp"
#include "hiref/exact.hpp"
#include "hiref/kernels.hpp"
#include "hiref/refine.hpp"
#include "hiref/rng.hpp"
#include "hiref/schedule.hpp"

using namespace hiref;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("C%-2d %s %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

bool is_permutation(const std::vector<Index>& perm) {
    std::vector<bool> seen(perm.size(), false);
    for (Index p : perm) {
        if (p < 0 || p >= static_cast<Index>(perm.size())) return false;
        if (seen[static_cast<std::size_t>(p)]) return false;
        seen[static_cast<std::size_t>(p)] = true;
    }
    return true;
}

CostOracle exact_kernel(const Dataset& X, const Dataset& Y, CostKind kind) {
    return CostOracle::kernel(std::make_shared<const Dataset>(X),
                              std::make_shared<const Dataset>(Y), kind);
}

const Family kFamilies[3] = {Family::Checkerboard, Family::MafMoonsRings,
                             Family::HalfmoonScurve};

// ---------------------------------------------------------------------------
// 1. Bijection + balance over 210 randomized runs, < 5 min.
// ---------------------------------------------------------------------------
void criterion_1() {
    const auto t0 = Clock::now();
    const std::vector<Index> sizes{64, 128, 250, 256, 512, 729, 1000, 1024, 2048, 4096};
    BenchPolicy policy;
    policy.q_max = 128;
    Index runs = 0, ok = 0;
    for (Family family : kFamilies) {
        for (Index n : sizes) {
            for (std::uint64_t seed = 0; seed < 7; ++seed) {
                SyntheticSpec spec{family, n, 1000 + seed};
                const auto [X, Y] = generate(spec);
                const RankSchedule sched = bench_schedule(n, policy);
                const CostOracle oracle = factor_sqeuclidean(X, Y);
                RefineParams rp;
                rp.record_clusterings = true;
                rp.instrument = false;
                auto [bij, rep] = hierarchical_refine(X, Y, oracle, sched, rp, seed);
                bool good = is_permutation(bij.perm);
                for (const auto& gamma : rep.clusterings) {
                    Index total = 0;
                    for (const auto& [xs, ys] : gamma.pairs) {
                        good = good && xs.size() == ys.size() && xs.size() == n / gamma.rho;
                        total += xs.size();
                    }
                    good = good && total == n;
                }
                ++runs;
                if (good) ++ok;
            }
        }
    }
    const double secs = seconds_since(t0);
    report(1, ok == runs && runs >= 200 && secs < 300.0,
           fmt("bijection+balance %lld/%lld runs, %.0fs (limit 300s)", (long long)ok,
               (long long)runs, secs));
}

// ---------------------------------------------------------------------------
// 2. Mean cost within [1.00, 1.05] x Hungarian per family, n=512, W2^2.
// ---------------------------------------------------------------------------
void criterion_2() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (Family family : kFamilies) {
        double hiref_sum = 0.0, exact_sum = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SyntheticSpec spec{family, 512, 2000 + seed};
            const auto [X, Y] = generate(spec);
            const CostOracle oracle = factor_sqeuclidean(X, Y);
            const RankSchedule sched = bench_schedule(512, BenchPolicy{});
            auto [bij, rep] = hierarchical_refine(X, Y, oracle, sched, {}, seed);
            hiref_sum += bij.cost;
            exact_sum += hungarian(oracle.densify()).cost;
        }
        const double ratio = hiref_sum / exact_sum;
        detail += fmt("%s %.4f ", family_name(family), ratio);
        pass = pass && ratio >= 1.0 - 1e-12 && ratio <= 1.05;
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 600.0;
    report(2, pass, fmt("mean ratio vs exact (limit [1.00,1.05]): %s%.0fs (limit 600s)",
                        detail.c_str(), secs));
}

// ---------------------------------------------------------------------------
// 3. Parity with Sinkhorn(eps=0.05) at n=1024, W2^2; strictly lower on the
//    checkerboard in >= 7/10 seeds.
// ---------------------------------------------------------------------------
void criterion_3() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    int cb_wins = 0;
    for (Family family : kFamilies) {
        double hiref_sum = 0.0, sink_sum = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SyntheticSpec spec{family, 1024, 3000 + seed};
            const auto [X, Y] = generate(spec);
            const CostOracle oracle = factor_sqeuclidean(X, Y);
            const RankSchedule sched = bench_schedule(1024, BenchPolicy{});
            auto [bij, rep] = hierarchical_refine(X, Y, oracle, sched, {}, seed);
            RowMat C = oracle.densify();
            const double eps = 0.05 * C.mean();  // mean-cost scaling
            EntropicProblem prob(CostOracle::dense(std::move(C), CostKind::SqEuclidean),
                                 uniform_weights(1024), uniform_weights(1024), eps);
            const SinkhornResult sr = sinkhorn(prob);
            const double sink_cost = entropic_cost(prob, sr.potentials);
            hiref_sum += bij.cost;
            sink_sum += sink_cost;
            if (family == Family::Checkerboard && bij.cost < sink_cost) ++cb_wins;
        }
        const double gap = std::abs(hiref_sum - sink_sum) / sink_sum;
        detail += fmt("%s gap %.4f ", family_name(family), gap);
        pass = pass && gap <= 0.08;
    }
    pass = pass && cb_wins >= 7;
    const double secs = seconds_since(t0);
    pass = pass && secs < 900.0;
    report(3, pass,
           fmt("|hiref-sinkhorn|/sinkhorn (limit 0.08): %scb wins %d/10 (need 7), "
               "%.0fs (limit 900s)",
               detail.c_str(), cb_wins, secs));
}

// ---------------------------------------------------------------------------
// 4. Sparsity/entropy at n=1024: hiref has exactly n nonzeros and Shannon
//    entropy ln n (+-1e-9); Sinkhorn has >= 100 n nonzeros at 1e-8.
// ---------------------------------------------------------------------------
void criterion_4() {
    bool pass = true;
    std::string detail;
    const double ln_n = std::log(1024.0);
    for (Family family : kFamilies) {
        SyntheticSpec spec{family, 1024, 4000};
        const auto [X, Y] = generate(spec);
        const CostOracle oracle = factor_sqeuclidean(X, Y);
        const RankSchedule sched = bench_schedule(1024, BenchPolicy{});
        auto [bij, rep] = hierarchical_refine(X, Y, oracle, sched, {}, 4000);

        // Bijective plan stats, computed literally from the permutation.
        Index nonzeros = 0;
        double shannon = 0.0;
        for (Index i = 0; i < 1024; ++i) {
            const double p = 1.0 / 1024.0;
            if (p > 1e-8) ++nonzeros;
            shannon -= p * std::log(p);
        }
        pass = pass && is_permutation(bij.perm) && nonzeros == 1024 &&
               std::abs(shannon - ln_n) <= 1e-9;

        RowMat C = oracle.densify();
        const double eps = 0.05 * C.mean();  // mean-cost scaling
        EntropicProblem prob(CostOracle::dense(std::move(C), CostKind::SqEuclidean),
                             uniform_weights(1024), uniform_weights(1024), eps);
        const SinkhornResult sr = sinkhorn(prob);
        const PlanStats st = plan_stats_streaming(prob, sr.potentials, 1e-8);
        detail += fmt("%s sink_nnz %lld ", family_name(family), (long long)st.nonzeros);
        pass = pass && st.nonzeros >= 100 * 1024;
    }
    report(4, pass,
           fmt("hiref nnz==1024, shannon==ln(1024)+-1e-9; sinkhorn nnz>=102400: %s",
               detail.c_str()));
}

// ---------------------------------------------------------------------------
// 5. Rank-schedule DP: reference schedules exact; matches brute force for
//    n <= 5000, depth <= 4, caps <= 32; < 2 min.
// ---------------------------------------------------------------------------
struct BruteBest {
    Index obj = std::numeric_limits<Index>::max() / 4;
    bool found = false;
};

void brute_enumerate(Index value, Index max_len, Index r_max, Index partial,
                     Index obj_acc, BruteBest& best) {
    if (value == 1) {
        if (partial > 1 && obj_acc < best.obj) {
            best.obj = obj_acc;
            best.found = true;
        }
        return;
    }
    if (max_len <= 0) return;
    for (Index f = 2; f <= std::min(value, r_max); ++f) {
        if (value % f != 0) continue;
        brute_enumerate(value / f, max_len - 1, r_max, partial * f,
                        obj_acc + partial * f, best);
    }
}

BruteBest brute_schedule(Index n, Index depth, Index r_max, Index q_max) {
    BruteBest best;
    for (Index q = 1; q < n; ++q) {
        if (n % q != 0 || q > q_max) continue;
        const Index len = q > 1 ? depth - 1 : depth;
        if (len < 1) continue;
        brute_enumerate(n / q, len, r_max, 1, 0, best);
    }
    return best;
}

void criterion_5() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;

    const auto imagenet = optimal_schedule({640500, 3, 64, 2048, false});
    const bool ok_a = imagenet.schedule.ranks == std::vector<Index>{7, 50} &&
                      imagenet.schedule.base == 1830;
    const auto synth = optimal_schedule({1024, 2, 16, 1024, false});
    const bool ok_b =
        synth.schedule.ranks == std::vector<Index>{2} && synth.schedule.base == 512;
    pass = ok_a && ok_b;
    detail += fmt("[7,50]+1830 %s, [2]+512 %s, ", ok_a ? "ok" : "BAD", ok_b ? "ok" : "BAD");

    Index checked = 0, mismatches = 0;
    for (auto [depth, r_max, q_max] :
         {std::tuple<Index, Index, Index>{4, 32, 32},
          std::tuple<Index, Index, Index>{3, 16, 1},
          std::tuple<Index, Index, Index>{2, 32, 2048}}) {
        for (Index n = 2; n <= 5000; ++n) {
            const BruteBest brute = brute_schedule(n, depth, r_max, q_max);
            try {
                const auto res = optimal_schedule({n, depth, r_max, q_max, false});
                ++checked;
                if (!brute.found || res.schedule.objective() != brute.obj) ++mismatches;
                std::string diag;
                if (!validate_schedule(res.schedule.ranks, res.schedule.base, n, &diag,
                                       r_max, q_max))
                    ++mismatches;
            } catch (const ScheduleInfeasible&) {
                ++checked;
                if (brute.found) ++mismatches;
            }
        }
    }
    const double secs = seconds_since(t0);
    pass = pass && mismatches == 0 && secs < 120.0;
    report(5, pass,
           fmt("%sbrute-force sweep %lld cases, %lld mismatches, %.0fs (limit 120s)",
               detail.c_str(), (long long)checked, (long long)mismatches, secs));
}

// ---------------------------------------------------------------------------
// 6. Co-clustering agreement with the exact map on separable instances.
// ---------------------------------------------------------------------------
void criterion_6() {
    Index points = 0, agreed = 0;
    for (Index r : {Index{2}, Index{3}, Index{4}}) {
        const Index per = (120 / r) / 2 * 2;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(5000 * static_cast<std::uint64_t>(r) + seed);
            const Index n = per * r;
            RowMat xs(n, 2), ys(n, 2);
            for (Index c = 0; c < r; ++c) {
                const double cx = 30.0 * static_cast<double>(c);
                const double cy = 17.0 * static_cast<double>(c % 2);
                for (Index t = 0; t < per; ++t) {
                    const Index i = c * per + t;
                    xs(i, 0) = cx + rng.next_uniform(-0.5, 0.5);
                    xs(i, 1) = cy + rng.next_uniform(-0.5, 0.5);
                    ys(i, 0) = cx + rng.next_uniform(-0.5, 0.5);
                    ys(i, 1) = cy + rng.next_uniform(-0.5, 0.5);
                }
            }
            Dataset X(xs), Y(ys);
            const RowMat C = exact_kernel(X, Y, CostKind::Euclidean).densify();
            const auto oracle = CostOracle::dense(C, CostKind::Euclidean);
            const Vector u = uniform_weights(n);
            const auto res = solve_lrot(oracle, u, u, r, {}, seed);
            const auto caps = balanced_capacities(n, r);
            const auto hx = harden(res.factors.Q, caps);
            const auto hy = harden(res.factors.R, caps);
            const auto monge = hungarian(C);
            for (Index i = 0; i < n; ++i) {
                ++points;
                if (hx.labels[static_cast<std::size_t>(i)] ==
                    hy.labels[static_cast<std::size_t>(
                        monge.perm[static_cast<std::size_t>(i)])])
                    ++agreed;
            }
        }
    }
    report(6, agreed == points,
           fmt("separable co-clustering %lld/%lld points agree (need 100%%)",
               (long long)agreed, (long long)points));
}

// ---------------------------------------------------------------------------
// 7. Per-scale monotonicity: exact route on n <= 12 with the diameter bound;
//    approximate route never above the mean-cost coupling.
// ---------------------------------------------------------------------------
void criterion_7() {
    bool pass = true;
    std::string detail;

    Index exact_levels = 0, exact_bad = 0, bound_bad = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(7000 + seed);
        RowMat xs(12, 2), ys(12, 2);
        for (Index i = 0; i < 12; ++i)
            for (int d = 0; d < 2; ++d) {
                xs(i, d) = rng.next_uniform(-1.0, 1.0);
                ys(i, d) = rng.next_uniform(-1.0, 1.0);
            }
        Dataset X(xs), Y(ys);
        const auto oracle = exact_kernel(X, Y, CostKind::Euclidean);
        RefineParams rp;
        rp.brute_force_lrot = true;
        rp.diam_sample = 64;  // exact diameters at this size
        auto [bij, rep] = hierarchical_refine(X, Y, oracle, make_schedule({2, 2}, 3), rp, seed);
        for (const auto& lv : rep.levels) {
            ++exact_levels;
            if (lv.delta < -1e-9) ++exact_bad;
            if (lv.delta > lv.mean_diam + 1e-9) ++bound_bad;  // |grad c| = 1
        }
    }
    pass = exact_bad == 0 && bound_bad == 0;
    detail += fmt("exact route: %lld levels, %lld negative deltas, %lld bound breaks; ",
                  (long long)exact_levels, (long long)exact_bad, (long long)bound_bad);

    Index approx_runs = 0, approx_ok = 0;
    BenchPolicy policy;
    policy.q_max = 128;
    for (Family family : kFamilies) {
        for (Index n : {Index{1024}, Index{4096}}) {
            for (std::uint64_t seed = 0; seed < 2; ++seed) {
                SyntheticSpec spec{family, n, 7100 + seed};
                const auto [X, Y] = generate(spec);
                const CostOracle oracle = factor_sqeuclidean(X, Y);
                auto [bij, rep] =
                    hierarchical_refine(X, Y, oracle, bench_schedule(n, policy), {}, seed);
                ++approx_runs;
                if (rep.final_cost <= rep.levels.front().scale_cost + 1e-9) ++approx_ok;
            }
        }
    }
    pass = pass && approx_ok == approx_runs;
    detail += fmt("approximate route: %lld/%lld below the mean-cost coupling",
                  (long long)approx_ok, (long long)approx_runs);
    report(7, pass, detail);
}

// ---------------------------------------------------------------------------
// 8. Scaling: hiref log-log slope <= 1.4 over {2^12, 2^14, 2^16} single
//    thread, Euclidean; a 2^20 run completes with peak < 4 GB.
// ---------------------------------------------------------------------------
void criterion_8() {
    BenchPolicy policy;
    policy.q_max = 128;
    policy.r_max = 8;

    std::vector<double> log_n, log_t;
    std::string detail;
    for (int p : {12, 14, 16}) {
        const Index n = Index{1} << p;
        SyntheticSpec spec{Family::HalfmoonScurve, n, 8000};
        const auto [X, Y] = generate(spec);
        const auto t0 = Clock::now();
        const RankSchedule sched = bench_schedule(n, policy);
        const CostOracle oracle = bench_cost_oracle(X, Y, CostKind::Euclidean, policy, 8000);
        RefineParams rp;
        rp.threads = 1;
        auto [bij, rep] = hierarchical_refine(X, Y, oracle, sched, rp, 8000);
        const double secs = seconds_since(t0);
        log_n.push_back(std::log(static_cast<double>(n)));
        log_t.push_back(std::log(secs));
        detail += fmt("2^%d %.1fs ", p, secs);
    }
    // Least-squares slope of log(time) on log(n).
    const double mean_x = (log_n[0] + log_n[1] + log_n[2]) / 3.0;
    const double mean_y = (log_t[0] + log_t[1] + log_t[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
        num += (log_n[i] - mean_x) * (log_t[i] - mean_y);
        den += (log_n[i] - mean_x) * (log_n[i] - mean_x);
    }
    const double slope = num / den;
    bool pass = slope <= 1.4;
    detail += fmt("slope %.3f (limit 1.4); ", slope);

    // Sinkhorn over the sizes below its densify limit, on a fixed sweep
    // budget so the timing reflects the per-iteration footprint.
    std::vector<double> sink_t;
    for (int p : {12, 14}) {
        const Index n = Index{1} << p;
        SyntheticSpec spec{Family::HalfmoonScurve, n, 8000};
        const auto [X, Y] = generate(spec);
        const auto t0 = Clock::now();
        EntropicProblem prob(
            CostOracle::dense(exact_kernel(X, Y, CostKind::Euclidean).densify(),
                              CostKind::Euclidean),
            uniform_weights(n), uniform_weights(n), 0.05);
        sinkhorn(prob, 150, 0.0);
        sink_t.push_back(seconds_since(t0));
    }
    const double sink_slope =
        std::log(sink_t[1] / sink_t[0]) / std::log(4.0);
    pass = pass && sink_slope >= 1.7;
    detail += fmt("sinkhorn slope %.2f (need >=1.7); ", sink_slope);

    {
        const Index n = Index{1} << 20;
        SyntheticSpec spec{Family::HalfmoonScurve, n, 8001};
        const auto [X, Y] = generate(spec);
        const auto t0 = Clock::now();
        const RankSchedule sched = bench_schedule(n, policy);
        const CostOracle oracle = bench_cost_oracle(X, Y, CostKind::Euclidean, policy, 8001);
        RefineParams rp;
        rp.threads = 1;
        auto [bij, rep] = hierarchical_refine(X, Y, oracle, sched, rp, 8001);
        const double secs = seconds_since(t0);
        const double peak_gb = static_cast<double>(peak_rss_bytes()) / (1 << 30);
        const double algo_bytes = static_cast<double>(rep.peak_bytes);
        const double algo_budget = 64.0 * 8.0 * static_cast<double>(n);
        const bool perm_ok = is_permutation(bij.perm);
        pass = pass && perm_ok && peak_gb < 4.0 && algo_bytes < algo_budget;
        detail += fmt("2^20 run %.0fs perm %s rss %.2f GB (limit 4), working set %.0f MB "
                      "(limit %.0f MB)",
                      secs, perm_ok ? "ok" : "BAD", peak_gb, algo_bytes / 1048576.0,
                      algo_budget / 1048576.0);
    }
    report(8, pass, detail);
}

// ---------------------------------------------------------------------------
// 9. Cost factorizations: squared-Euclidean exact to 1e-9 relative on 1000
//    instances; sampled factors within 2x of the best rank-16 error.
// ---------------------------------------------------------------------------
void criterion_9() {
    Rng rng(9000);
    Index bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.next_below(30));
        const Index m = 2 + static_cast<Index>(rng.next_below(30));
        const int d = 1 + static_cast<int>(rng.next_below(8));
        RowMat xs(n, d), ys(m, d);
        for (Index i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) xs(i, k) = rng.next_uniform(-3.0, 3.0);
        for (Index j = 0; j < m; ++j)
            for (int k = 0; k < d; ++k) ys(j, k) = rng.next_uniform(-3.0, 3.0);
        Dataset X(xs), Y(ys);
        const auto fact = factor_sqeuclidean(X, Y);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < m; ++j) {
                const double exact = (xs.row(i) - ys.row(j)).squaredNorm();
                if (std::abs(fact.entry(i, j) - exact) > 1e-9 * (1.0 + exact)) ++bad;
            }
    }
    bool pass = bad == 0;
    std::string detail = fmt("sqeuclidean exactness: %lld bad entries over 1000 instances; ",
                             (long long)bad);

    SyntheticSpec spec{Family::HalfmoonScurve, 512, 9001};
    const auto [X, Y] = generate(spec);
    const RowMat C = exact_kernel(X, Y, CostKind::Euclidean).densify();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(C);
    double tail = 0.0;
    for (Index i = 16; i < svd.singularValues().size(); ++i)
        tail += svd.singularValues()(i) * svd.singularValues()(i);
    const double best = std::sqrt(tail) / C.norm();
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto approx = factor_metric_sampled(X, Y, 16, 8.0, seed, CostKind::Euclidean);
        double num = 0.0;
        for (Index i = 0; i < 512; ++i)
            for (Index j = 0; j < 512; ++j) {
                const double dlt = approx.entry(i, j) - C(i, j);
                num += dlt * dlt;
            }
        errs.push_back(std::sqrt(num) / C.norm());
    }
    std::sort(errs.begin(), errs.end());
    const double median = errs[errs.size() / 2];
    pass = pass && median <= 2.0 * best;
    detail += fmt("sampled rank-16 median error %.2e vs best %.2e (limit 2x)", median, best);
    report(9, pass, detail);
}

// ---------------------------------------------------------------------------
// 10. Mini-batch: feasible marginals, never below Hungarian, and improving
//     medians as the batch doubles 32 -> 256 on the n=512 checkerboard.
// ---------------------------------------------------------------------------
void criterion_10() {
    bool pass = true;
    std::string detail;

    {
        SyntheticSpec spec{Family::MafMoonsRings, 256, 10000};
        const auto [X, Y] = generate(spec);
        const auto oracle = exact_kernel(X, Y, CostKind::SqEuclidean);
        const auto mb = minibatch_ot(X, Y, oracle, 32, 0.05, 1);
        const auto [rows, cols] = minibatch_marginals(mb.plan, oracle, 0.05, 256, 256);
        double worst = 0.0;
        for (Index i = 0; i < 256; ++i) {
            worst = std::max(worst, std::abs(rows(i) - 1.0 / 256.0));
            worst = std::max(worst, std::abs(cols(i) - 1.0 / 256.0));
        }
        pass = pass && worst <= 1e-6;
        detail += fmt("marginal violation %.1e (limit 1e-6); ", worst);
    }

    Index dominated = 0, total = 0;
    for (Family family : kFamilies) {
        for (Index n : {Index{128}, Index{512}}) {
            SyntheticSpec spec{family, n, 10100};
            const auto [X, Y] = generate(spec);
            const auto oracle = exact_kernel(X, Y, CostKind::SqEuclidean);
            const double exact = hungarian(oracle.densify()).cost;
            for (Index B : {Index{32}, Index{128}}) {
                const auto mb = minibatch_ot(X, Y, oracle, B, 0.05, 7);
                ++total;
                if (mb.cost >= exact - 1e-9) ++dominated;
            }
        }
    }
    pass = pass && dominated == total;
    detail += fmt("cost >= Hungarian on %lld/%lld instances; ", (long long)dominated,
                  (long long)total);

    std::vector<double> medians;
    for (Index B : {Index{32}, Index{64}, Index{128}, Index{256}}) {
        std::vector<double> costs;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SyntheticSpec spec{Family::Checkerboard, 512, 10200 + seed};
            const auto [X, Y] = generate(spec);
            const auto oracle = exact_kernel(X, Y, CostKind::SqEuclidean);
            costs.push_back(minibatch_ot(X, Y, oracle, B, 0.05, seed).cost);
        }
        std::sort(costs.begin(), costs.end());
        medians.push_back((costs[4] + costs[5]) / 2.0);
    }
    bool trend = true;
    for (std::size_t i = 1; i < medians.size(); ++i) trend = trend && medians[i] <= medians[i - 1];
    pass = pass && trend;
    detail += fmt("medians B=32..256: %.4f %.4f %.4f %.4f (non-increasing %s)", medians[0],
                  medians[1], medians[2], medians[3], trend ? "yes" : "NO");
    report(10, pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    using Fn = void (*)();
    const Fn criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                           criterion_5, criterion_6, criterion_7, criterion_8,
                           criterion_9, criterion_10};
    for (int c = 1; c <= 10; ++c) {
        if (only != 0 && only != c) continue;
        criteria[c - 1]();
    }
    if (only == 0)
        std::printf("%s (%d criterion failures)\n", g_failures == 0 ? "ALL PASS" : "FAILED",
                    g_failures);
    return g_failures == 0 ? 0 : 1;
}

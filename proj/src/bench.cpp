#include "hiref/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hiref/baselines.hpp"
#include "hiref/entropic.hpp"
#include "hiref/errors.hpp"
#include "hiref/exact.hpp"
#include "hiref/kernels.hpp"
#include "hiref/rng.hpp"

namespace hiref {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

PlanStats bijection_stats(Index n, double threshold) {
    PlanStats s;
    const double p = 1.0 / static_cast<double>(n);
    s.nonzeros = p > threshold ? n : 0;
    s.entropy_shannon = -static_cast<double>(n) * p * std::log(p);
    s.entropy_eq4 = s.entropy_shannon + 1.0;
    return s;
}

struct MethodSpec {
    std::string name;  // hiref | sinkhorn | minibatch | exact
    Index batch = 0;   // minibatch batch size
};

MethodSpec parse_method(const std::string& m) {
    if (m == "hiref" || m == "sinkhorn" || m == "exact") return {m, 0};
    const std::string prefix = "minibatch:";
    if (m.rfind(prefix, 0) == 0) {
        const std::string arg = m.substr(prefix.size());
        try {
            const long b = std::stol(arg);
            if (b >= 2) return {"minibatch", static_cast<Index>(b)};
        } catch (...) {
        }
        throw UsageError("bad mini-batch size in '" + m + "'");
    }
    throw UsageError("unknown method '" + m + "'");
}

}  // namespace

RankSchedule bench_schedule(Index n, const BenchPolicy& policy) {
    ScheduleQuery q;
    q.n = n;
    q.depth = policy.depth > 0 ? policy.depth : 12;
    q.r_max = policy.r_max;
    q.q_max = policy.q_max;
    q.trim = false;
    return optimal_schedule(q).schedule;
}

CostOracle bench_cost_oracle(const Dataset& X, const Dataset& Y, CostKind kind,
                             const BenchPolicy& policy, std::uint64_t seed) {
    if (kind == CostKind::SqEuclidean) return factor_sqeuclidean(X, Y);
    const Index rank = std::min<Index>(policy.cost_rank, std::min(X.size(), Y.size()));
    return factor_metric_sampled(X, Y, rank, policy.oversample, mix_seed(seed, 0xc057ULL),
                                 kind);
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    std::vector<BenchRow> rows;
    for (Index n : config.sizes) {
        for (std::uint64_t seed : config.seeds) {
            SyntheticSpec spec;
            spec.family = config.family;
            spec.n = n;
            spec.seed = seed;
            const auto [X, Y] = generate(spec);
            for (CostKind kind : config.costs) {
                auto exact_oracle = CostOracle::kernel(std::make_shared<const Dataset>(X),
                                                       std::make_shared<const Dataset>(Y),
                                                       kind);
                for (const std::string& m : config.methods) {
                    const MethodSpec ms = parse_method(m);
                    BenchRow row;
                    row.method = m;
                    row.n = n;
                    row.cost_tag = kind;
                    row.seed = seed;

                    if (ms.name == "hiref") {
                        const auto t0 = Clock::now();
                        const RankSchedule sched = bench_schedule(n, config.policy);
                        const CostOracle oracle =
                            bench_cost_oracle(X, Y, kind, config.policy, seed);
                        RefineParams rp;
                        rp.threads = config.threads;
                        auto [bij, report] =
                            hierarchical_refine(X, Y, oracle, sched, rp, seed);
                        row.ms = ms_since(t0);
                        // Reported cost is always through the exact kernel.
                        row.cost = kernels::sum_indexed(n, config.threads, [&](Index i) {
                                       return exact_oracle.entry(
                                           i, bij.perm[static_cast<std::size_t>(i)]);
                                   }) /
                                   static_cast<double>(n);
                        const PlanStats st = bijection_stats(n, config.nonzero_threshold);
                        row.entropy_shannon = st.entropy_shannon;
                        row.entropy_eq4 = st.entropy_eq4;
                        row.nonzeros = st.nonzeros;
                    } else if (ms.name == "sinkhorn") {
                        if (n > config.sinkhorn_densify_limit) continue;
                        const auto t0 = Clock::now();
                        // Epsilon scales with the mean cost, the convention of
                        // the reference entropic baselines.
                        RowMat C = exact_oracle.densify(config.threads);
                        const double eps =
                            std::max(config.sinkhorn_epsilon * C.mean(), 1e-12);
                        EntropicProblem prob(CostOracle::dense(std::move(C), kind),
                                             uniform_weights(n), uniform_weights(n), eps);
                        const SinkhornResult sr = sinkhorn(prob);
                        row.cost = entropic_cost(prob, sr.potentials);
                        row.ms = ms_since(t0);
                        const PlanStats st = plan_stats_streaming(prob, sr.potentials,
                                                                  config.nonzero_threshold);
                        row.entropy_shannon = st.entropy_shannon;
                        row.entropy_eq4 = st.entropy_eq4;
                        row.nonzeros = st.nonzeros;
                    } else if (ms.name == "minibatch") {
                        if (ms.batch > n) continue;
                        const auto t0 = Clock::now();
                        const MiniBatchResult mb =
                            minibatch_ot(X, Y, exact_oracle, ms.batch,
                                         config.sinkhorn_epsilon, seed, 2000, 1e-6,
                                         config.threads);
                        row.cost = mb.cost;
                        row.ms = ms_since(t0);
                        const PlanStats st =
                            minibatch_plan_stats(mb.plan, exact_oracle,
                                                 config.sinkhorn_epsilon,
                                                 config.nonzero_threshold);
                        row.entropy_shannon = st.entropy_shannon;
                        row.entropy_eq4 = st.entropy_eq4;
                        row.nonzeros = st.nonzeros;
                    } else {  // exact
                        if (n > config.exact_limit) continue;
                        const auto t0 = Clock::now();
                        const Assignment a = hungarian(exact_oracle.densify(config.threads));
                        row.cost = a.cost;
                        row.ms = ms_since(t0);
                        const PlanStats st = bijection_stats(n, config.nonzero_threshold);
                        row.entropy_shannon = st.entropy_shannon;
                        row.entropy_eq4 = st.entropy_eq4;
                        row.nonzeros = st.nonzeros;
                    }
                    row.peak_mem = peak_rss_bytes();
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << "method,n,cost_tag,cost,entropy_shannon,entropy_eq4,nonzeros,ms,seed\n";
    out.precision(12);
    for (const auto& r : rows) {
        out << r.method << ',' << r.n << ',' << cost_kind_name(r.cost_tag) << ','
            << r.cost << ',' << r.entropy_shannon << ',' << r.entropy_eq4 << ','
            << r.nonzeros << ',' << r.ms << ',' << r.seed << '\n';
    }
}

std::size_t peak_rss_bytes() {
    std::ifstream status("/proc/self/status");
    std::string line;
    while (std::getline(status, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::istringstream ss(line.substr(6));
            std::size_t kb = 0;
            ss >> kb;
            return kb * 1024;
        }
    }
    return 0;
}

}  // namespace hiref

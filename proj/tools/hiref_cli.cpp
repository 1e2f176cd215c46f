// Command-line surface: dataset generation, rank-schedule search, alignment,
// and the benchmark harness. Outputs are UTF-8 with LF line endings.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>

#include "hiref/baselines.hpp"
#include "hiref/bench.hpp"
#include "hiref/datagen.hpp"
#include "hiref/entropic.hpp"
#include "hiref/errors.hpp"
#include "hiref/kernels.hpp"
#include "hiref/refine.hpp"
#include "hiref/rng.hpp"
#include "hiref/schedule.hpp"

namespace {

using nlohmann::json;
using namespace hiref;

int threads_or_env(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("OT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

struct GenArgs {
    std::string dataset;
    Index n = 0;
    std::uint64_t seed = 0;
    std::string out_source, out_target;
    double rotation = 0.0, scale = 1.0, tx = 0.0, ty = 0.0;
};

int cmd_gen(const GenArgs& a) {
    SyntheticSpec spec;
    spec.family = family_from_name(a.dataset);
    spec.n = a.n;
    spec.seed = a.seed;
    spec.transform = {a.rotation, a.scale, a.tx, a.ty};
    const auto [src, tgt] = generate(spec);
    save_points(src, a.out_source);
    save_points(tgt, a.out_target);
    return 0;
}

struct ScheduleArgs {
    Index n = 0;
    Index depth = 3;
    Index max_rank = 16;
    Index max_base = 1024;
    bool trim = false;
};

int cmd_schedule(const ScheduleArgs& a) {
    ScheduleQuery q{a.n, a.depth, a.max_rank, a.max_base, a.trim};
    const ScheduleResult res = optimal_schedule(q);
    json out;
    out["n"] = a.n;
    out["n_effective"] = res.schedule.n_effective;
    out["trimmed"] = res.trimmed;
    out["ranks"] = res.schedule.ranks;
    out["base"] = res.schedule.base;
    out["effective"] = res.schedule.effective;
    out["lrot_calls"] = res.schedule.lrot_calls();
    out["leaf_solves"] = res.schedule.leaf_solves();
    out["objective"] = res.schedule.objective();
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct AlignArgs {
    std::string source, target;
    std::string cost = "sqeuclidean";
    Index depth = 0;  // 0 = auto
    Index max_rank = 16;
    Index max_base = 1024;
    Index cost_rank = 16;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out = "pairs.csv";
    std::string metrics;
    bool trim = false;
};

int cmd_align(const AlignArgs& a) {
    Dataset X = load_points(a.source);
    Dataset Y = load_points(a.target);
    if (X.size() != Y.size())
        throw SizeError("source and target must have the same number of points");
    const CostKind kind = cost_kind_from_name(a.cost);

    ScheduleQuery q;
    q.n = X.size();
    q.depth = a.depth > 0 ? a.depth : 12;
    q.r_max = a.max_rank;
    q.q_max = a.max_base;
    q.trim = a.trim;
    const ScheduleResult sres = optimal_schedule(q);

    // Trimmed points are dropped uniformly at random under the run seed;
    // output indices refer to the original files.
    std::vector<Index> keep_x(static_cast<std::size_t>(X.size()));
    std::iota(keep_x.begin(), keep_x.end(), Index{0});
    std::vector<Index> keep_y = keep_x;
    if (sres.trimmed > 0) {
        Rng rng(mix_seed(a.seed, 0x7472696dULL));
        for (Index t = 0; t < sres.trimmed; ++t) {
            keep_x.erase(keep_x.begin() +
                         static_cast<std::ptrdiff_t>(rng.next_below(keep_x.size())));
            keep_y.erase(keep_y.begin() +
                         static_cast<std::ptrdiff_t>(rng.next_below(keep_y.size())));
        }
        X = gather(X, keep_x);
        Y = gather(Y, keep_y);
    }

    BenchPolicy policy;
    policy.cost_rank = a.cost_rank;
    const CostOracle oracle = bench_cost_oracle(X, Y, kind, policy, a.seed);

    RefineParams rp;
    rp.threads = threads_or_env(a.threads);
    auto [bij, report] = hierarchical_refine(X, Y, oracle, sres.schedule, rp, a.seed);

    std::ofstream pairs(a.out);
    if (!pairs) throw IoError("cannot open " + a.out);
    pairs << "source_index,target_index\n";
    for (Index i = 0; i < static_cast<Index>(bij.perm.size()); ++i)
        pairs << keep_x[static_cast<std::size_t>(i)] << ','
              << keep_y[static_cast<std::size_t>(bij.perm[static_cast<std::size_t>(i)])]
              << '\n';

    if (!a.metrics.empty()) {
        json m;
        m["n"] = X.size();
        json sched;
        sched["ranks"] = sres.schedule.ranks;
        sched["base"] = sres.schedule.base;
        m["schedule"] = sched;
        json levels = json::array();
        for (const auto& lv : report.levels) {
            levels.push_back({{"rho", lv.rho},
                              {"scale_cost", lv.scale_cost},
                              {"delta", lv.delta},
                              {"mean_diam", lv.mean_diam},
                              {"ms", lv.ms}});
        }
        m["per_level"] = levels;
        m["final_cost"] = bij.cost;
        m["trimmed"] = sres.trimmed;
        std::ofstream mf(a.metrics);
        if (!mf) throw IoError("cannot open " + a.metrics);
        mf << m.dump(2) << "\n";
    }
    return 0;
}

struct BenchArgs {
    std::string suite = "synthetic";
    std::string family = "checkerboard";
    std::vector<std::string> methods;
    std::vector<Index> sizes;
    std::vector<std::uint64_t> seeds;
    std::string costs = "both";
    std::string out = "bench.csv";
    Index densify_limit = Index{1} << 14;
    Index exact_limit = 2048;
    Index depth = 0;
    Index max_rank = 16;
    Index max_base = 1024;
    int threads = 0;
};

int cmd_bench(const BenchArgs& a) {
    if (a.suite != "synthetic") throw UsageError("unknown suite '" + a.suite + "'");
    BenchConfig cfg;
    cfg.family = family_from_name(a.family);
    cfg.methods = a.methods;
    cfg.sizes = a.sizes;
    cfg.seeds = a.seeds.empty() ? std::vector<std::uint64_t>{0} : a.seeds;
    if (a.costs == "both")
        cfg.costs = {CostKind::Euclidean, CostKind::SqEuclidean};
    else
        cfg.costs = {cost_kind_from_name(a.costs)};
    cfg.sinkhorn_densify_limit = a.densify_limit;
    cfg.exact_limit = a.exact_limit;
    cfg.threads = threads_or_env(a.threads);
    cfg.policy.depth = a.depth;
    cfg.policy.r_max = a.max_rank;
    cfg.policy.q_max = a.max_base;
    const auto rows = run_bench(cfg);
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot open " + a.out);
    write_bench_csv(rows, out);
    std::cerr << rows.size() << " rows -> " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical refinement optimal transport toolkit"};
    app.require_subcommand(1);

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset pair");
    gen->add_option("--dataset", ga.dataset, "checkerboard|maf_moons_rings|halfmoon_scurve")
        ->required();
    gen->add_option("--n", ga.n, "points per side")->required();
    gen->add_option("--seed", ga.seed, "generator seed");
    gen->add_option("--out-source", ga.out_source, "source output path")->required();
    gen->add_option("--out-target", ga.out_target, "target output path")->required();
    gen->add_option("--rotation", ga.rotation, "target rotation (radians)");
    gen->add_option("--scale", ga.scale, "target scale");
    gen->add_option("--tx", ga.tx, "target x translation");
    gen->add_option("--ty", ga.ty, "target y translation");

    ScheduleArgs sa;
    auto* sch = app.add_subcommand("schedule", "Optimal rank-annealing schedule");
    sch->add_option("--n", sa.n, "dataset size")->required();
    sch->add_option("--depth", sa.depth, "hierarchy depth cap");
    sch->add_option("--max-rank", sa.max_rank, "per-level rank cap");
    sch->add_option("--max-base", sa.max_base, "leaf block size cap");
    sch->add_flag("--trim", sa.trim, "allow trimming to the nearest feasible size");

    AlignArgs aa;
    auto* al = app.add_subcommand("align", "Compute a bijective transport map");
    al->add_option("--source", aa.source, "source point file")->required();
    al->add_option("--target", aa.target, "target point file")->required();
    al->add_option("--cost", aa.cost, "euclidean|sqeuclidean");
    al->add_option("--depth", aa.depth, "hierarchy depth cap (0 = auto)");
    al->add_option("--max-rank", aa.max_rank, "per-level rank cap");
    al->add_option("--max-base", aa.max_base, "leaf block size cap");
    al->add_option("--cost-rank", aa.cost_rank, "sampled cost factor rank (euclidean)");
    al->add_option("--seed", aa.seed, "run seed");
    al->add_option("--threads", aa.threads, "worker threads (default OT_THREADS or 1)");
    al->add_option("--out", aa.out, "pairs CSV path");
    al->add_option("--metrics", aa.metrics, "metrics JSON path");
    al->add_flag("--trim", aa.trim, "allow trimming to the nearest feasible size");

    BenchArgs ba;
    auto* be = app.add_subcommand("bench", "Benchmark methods on synthetic data");
    be->add_option("--suite", ba.suite, "benchmark suite (synthetic)");
    be->add_option("--family", ba.family, "dataset family");
    be->add_option("--methods", ba.methods, "hiref|sinkhorn|minibatch:B|exact")
        ->required()
        ->delimiter(',');
    be->add_option("--sizes", ba.sizes, "dataset sizes")->required()->delimiter(',');
    be->add_option("--seeds", ba.seeds, "seeds")->delimiter(',');
    be->add_option("--costs", ba.costs, "euclidean|sqeuclidean|both");
    be->add_option("--out", ba.out, "output CSV path");
    be->add_option("--densify-limit", ba.densify_limit, "largest n Sinkhorn densifies");
    be->add_option("--exact-limit", ba.exact_limit, "largest n for the exact method");
    be->add_option("--depth", ba.depth, "hiref schedule depth cap (0 = auto)");
    be->add_option("--max-rank", ba.max_rank, "hiref per-level rank cap");
    be->add_option("--max-base", ba.max_base, "hiref leaf block size cap");
    be->add_option("--threads", ba.threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(ga);
        if (sch->parsed()) return cmd_schedule(sa);
        if (al->parsed()) return cmd_align(aa);
        if (be->parsed()) return cmd_bench(ba);
    } catch (const ScheduleInfeasible& e) {
        std::cerr << "infeasible schedule: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

// End-to-end checks of the installed command-line binary.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        std::printf("FAIL: %s\n", what.c_str());
        ++failures;
    }
}

int run(const std::string& args) {
    const std::string cmd = std::string(HIREF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string run_capture(const std::string& args) {
    const std::string path = "/tmp/hiref_cli_out.txt";
    const std::string cmd =
        std::string(HIREF_CLI_PATH) + " " + args + " > " + path + " 2>/dev/null";
    std::system(cmd.c_str());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    // schedule: reference query and JSON fields
    {
        const std::string out =
            run_capture("schedule --n 1024 --depth 2 --max-rank 16 --max-base 1024");
        const auto j = nlohmann::json::parse(out);
        expect(j["ranks"] == nlohmann::json::array({2}), "schedule ranks [2]");
        expect(j["base"] == 512, "schedule base 512");
        expect(j["lrot_calls"] == 1, "one low-rank call");
        expect(j["trimmed"] == 0, "no trim");
    }

    // infeasible schedule exits 3; with --trim it succeeds
    expect(run("schedule --n 509 --depth 2 --max-rank 16 --max-base 16") == 3,
           "infeasible exit code 3");
    expect(run("schedule --n 509 --depth 2 --max-rank 16 --max-base 16 --trim") == 0,
           "trim succeeds");

    // validation errors exit 2
    expect(run("schedule") == 2, "missing required flag exits 2");
    expect(run("gen --dataset swissroll --n 8 --out-source /tmp/a.csv --out-target /tmp/b.csv") == 2,
           "unknown family exits 2");

    // gen -> align on identical separable inputs gives the identity
    {
        std::ofstream pts("/tmp/hiref_pts.csv");
        pts << "x,y\n0,0\n0.1,0\n10,0\n10.1,0\n";
        pts.close();
        const int rc = run(
            "align --source /tmp/hiref_pts.csv --target /tmp/hiref_pts.csv "
            "--cost sqeuclidean --max-base 2 --seed 1 --out /tmp/hiref_pairs.csv "
            "--metrics /tmp/hiref_metrics.json");
        expect(rc == 0, "align exits 0");
        expect(slurp("/tmp/hiref_pairs.csv") ==
                   "source_index,target_index\n0,0\n1,1\n2,2\n3,3\n",
               "identity pairs");
        const auto m = nlohmann::json::parse(slurp("/tmp/hiref_metrics.json"));
        expect(m["n"] == 4, "metrics n");
        expect(m["final_cost"].get<double>() == 0.0, "metrics final cost 0");
        expect(m.contains("per_level") && m["per_level"].is_array(), "metrics per_level");
        expect(m["trimmed"] == 0, "metrics trimmed");
    }

    // gen -> align twice with one seed is bitwise reproducible
    {
        expect(run("gen --dataset halfmoon_scurve --n 64 --seed 9 "
                   "--out-source /tmp/hs_src.bin --out-target /tmp/hs_tgt.bin") == 0,
               "gen exits 0");
        const std::string base =
            "align --source /tmp/hs_src.bin --target /tmp/hs_tgt.bin --cost euclidean "
            "--max-base 16 --seed 5 --out ";
        expect(run(base + "/tmp/hs_pairs1.csv") == 0, "first align");
        expect(run(base + "/tmp/hs_pairs2.csv") == 0, "second align");
        expect(slurp("/tmp/hs_pairs1.csv") == slurp("/tmp/hs_pairs2.csv"),
               "bitwise identical pairs");
        expect(!slurp("/tmp/hs_pairs1.csv").empty(), "pairs non-empty");
    }

    // csv and binary point formats round-trip through gen
    {
        expect(run("gen --dataset checkerboard --n 32 --seed 2 "
                   "--out-source /tmp/cb_src.csv --out-target /tmp/cb_tgt.bin") == 0,
               "mixed formats");
        const std::string csv = slurp("/tmp/cb_src.csv");
        expect(csv.find(',') != std::string::npos, "csv has two columns");
    }

    // bench golden header
    {
        const int rc = run(
            "bench --methods hiref,exact --sizes 64 --seeds 1 --family checkerboard "
            "--costs sqeuclidean --max-base 32 --out /tmp/hiref_bench.csv");
        expect(rc == 0, "bench exits 0");
        const std::string csv = slurp("/tmp/hiref_bench.csv");
        expect(csv.rfind("method,n,cost_tag,cost,entropy_shannon,entropy_eq4,nonzeros,ms,seed\n",
                         0) == 0,
               "bench csv header");
        expect(csv.find("hiref,64,sqeuclidean") != std::string::npos, "hiref row present");
    }

    if (failures == 0) std::printf("cli tests passed\n");
    return failures == 0 ? 0 : 1;
}

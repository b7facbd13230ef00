#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "asnn/cli.hpp"
#include "asnn/data_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "asnn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = asnn::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "asnn_cli" / name;
    fs::remove_all(d);
    return d;
}

json manifest(const fs::path& d) { return json::parse(std::ifstream(d / "manifest.json")); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Small road so each command runs in well under a second.
const std::vector<std::string> kSmall = {"--set", "simulation.nx=30",        "--set", "simulation.steps=60",
                                         "--set", "simulation.pocket_start_m=1500"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("errors are a single machine-readable line") {
    Result r = run({"bogus"});
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["error"]["kind"] == "usage");
    r = run({"simulate", "--set", "cost.nope=1", "-o", dir("err").string()});
    CHECK(r.code == 1);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    CHECK(json::parse(r.err)["error"]["kind"] == "config");
    r = run({"simulate", "--set", "simulation.dt_s=10", "-o", dir("cfl").string()});
    CHECK(r.code == 1);
    CHECK(json::parse(r.err)["error"]["message"].get<std::string>().find("CFL") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("simulate writes the truth field and a manifest") {
    const fs::path d = dir("sim");
    Result r = run(with({"simulate", "-o", d.string()}, kSmall));
    REQUIRE(r.code == 0);
    const json m = manifest(d);
    CHECK(m["command"] == "simulate");
    CHECK(m["outputs"].contains("truth.csv"));
    CHECK(m["outputs"]["truth.csv"] == asnn::file_digest(d / "truth.csv"));
    CHECK(fs::exists(d / "timing.json"));
    CHECK_FALSE(m.dump().find("wall_time") != std::string::npos);
    const asnn::Field truth = asnn::import_field(d / "truth.csv");
    CHECK(truth.grid().nx == 30);
    CHECK(truth.grid().nt == 61);

    const fs::path z = dir("sim0");
    REQUIRE(run({"simulate", "--set", "simulation.steps=0", "-o", z.string()}).code == 0);
    CHECK(asnn::import_field(z / "truth.csv").grid().nt == 1);
}

TEST_CASE("jam band moves upstream and free flow stays uniform") {
    const fs::path d = dir("band");
    REQUIRE(run({"simulate", "--set", "simulation.steps=200", "-o", d.string()}).code == 0);
    const asnn::Field v = asnn::import_field(d / "truth.csv");
    auto slowest = [&](std::size_t j) {
        std::size_t arg = 0;
        for (std::size_t i = 0; i < v.grid().nx; ++i)
            if (v(i, j) < v(arg, j)) arg = i;
        return arg;
    };
    CHECK(slowest(200) < slowest(0));

    const fs::path f = dir("free");
    REQUIRE(run({"simulate", "--set", "simulation.preset=free_flow", "--set", "simulation.steps=50", "-o",
                 f.string()})
                .code == 0);
    const asnn::Field ff = asnn::import_field(f / "truth.csv");
    double mean = 0.0, var = 0.0;
    for (double x : ff.values()) mean += x;
    mean /= double(ff.size());
    for (double x : ff.values()) var += (x - mean) * (x - mean);
    var /= double(ff.size());
    CHECK(var < 1e-6 * mean);
}

TEST_CASE("sample, estimate, train, evaluate, export pipeline") {
    const fs::path d = dir("pipe");
    REQUIRE(run(with({"simulate", "-o", (d / "sim").string()}, kSmall)).code == 0);
    const std::string truth = (d / "sim" / "truth.csv").string();
    Result r = run(with({"sample", "--truth", truth, "-o", (d / "smp").string()}, kSmall));
    REQUIRE(r.code == 0);
    const std::string obs = (d / "smp" / "observations.csv").string();
    CHECK(manifest(d / "smp")["inputs"]["truth"]["sha256"] == asnn::file_digest(truth));

    r = run(with({"estimate", "--obs", obs, "--truth", truth, "--lambda", "3", "-o", (d / "est").string()}, kSmall));
    REQUIRE(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(r.out.find("ASM m_r=") != std::string::npos);

    r = run(with({"estimate", "--obs", obs, "-o", (d / "est2").string()}, kSmall));
    REQUIRE(r.code == 0);
    CHECK(manifest(d / "est2")["metrics"][0]["m_r"].is_null());
    CHECK(slurp(d / "est" / "estimate.csv") == slurp(d / "est2" / "estimate.csv"));

    r = run(with({"train", "--obs", obs, "--truth", truth, "--epochs", "5", "-o", (d / "trn").string()}, kSmall));
    REQUIRE(r.code == 0);
    std::ifstream hist(d / "trn" / "cost_history.csv");
    std::string line;
    std::getline(hist, line);
    CHECK(line == "epoch,cost");
    double prev = 1e300;
    while (std::getline(hist, line)) {
        const double c = std::stod(line.substr(line.find(',') + 1));
        CHECK(c <= prev);
        prev = c;
    }
    const json params = json::parse(std::ifstream(d / "trn" / "params.json"));
    CHECK(params["asm"]["c_free_kmh"] == 80.0);  // smoothing layers frozen by default

    r = run({"evaluate", "--estimate", (d / "est" / "estimate.csv").string(), "--truth", truth, "-o",
             (d / "ev").string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(d / "ev" / "abs_error.pgm"));
    r = run({"evaluate", "--estimate", truth, "--truth", truth, "-o", (d / "ev0").string()});
    CHECK(r.out.find("m_r=0.000000") != std::string::npos);
    r = run({"evaluate", "--estimate", (d / "sim" / "density.csv").string(), "--truth",
             (d / "ev" / "abs_error.csv").string(), "-o", (d / "ev1").string()});
    CHECK(r.code == 0);

    r = run({"export", "--field", truth, "--format", "pgm", "--output", "t.pgm", "-o", (d / "exp").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(d / "exp" / "t.pgm") == slurp(d / "sim" / "truth.pgm"));
}

TEST_CASE("evaluate rejects mismatched grids") {
    const fs::path d = dir("mismatch");
    REQUIRE(run(with({"simulate", "-o", (d / "a").string()}, kSmall)).code == 0);
    REQUIRE(run({"simulate", "--set", "simulation.nx=20", "--set", "simulation.steps=10", "-o", (d / "b").string()})
                .code == 0);
    const Result r = run({"evaluate", "--estimate", (d / "a" / "truth.csv").string(), "--truth",
                          (d / "b" / "truth.csv").string(), "-o", (d / "c").string()});
    CHECK(r.code == 1);
    CHECK(json::parse(r.err)["error"]["kind"] == "shape");
}

TEST_CASE("ensemble weight table and hybrid sampling") {
    const fs::path d = dir("ens");
    REQUIRE(run(with({"simulate", "-o", (d / "sim").string()}, kSmall)).code == 0);
    const std::string truth = (d / "sim" / "truth.csv").string();
    REQUIRE(run(with({"sample", "--truth", truth, "--set", "sampling.mode=hybrid", "--set",
                      "sampling.detector_count=2", "--vehicles", "40", "-o", (d / "smp").string()},
                     kSmall))
                .code == 0);
    CHECK(fs::exists(d / "smp" / "trajectories.csv"));
    const std::string obs = (d / "smp" / "observations.csv").string();
    const Result r = run(with({"train-ensemble", "--obs", obs, "--truth", truth, "--epochs", "3", "-o",
                               (d / "ens").string()},
                              kSmall));
    REQUIRE(r.code == 0);
    std::ifstream w(d / "ens" / "weights.csv");
    std::string header;
    std::getline(w, header);
    CHECK(header.rfind("branch,sigma_m,tau_s,weight,asm_m_r", 0) == 0);
    int rows = 0;
    for (std::string line; std::getline(w, line);) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("lambda search needs truth and ranks candidates") {
    const fs::path d = dir("lam");
    REQUIRE(run(with({"simulate", "-o", (d / "sim").string()}, kSmall)).code == 0);
    const std::string truth = (d / "sim" / "truth.csv").string();
    REQUIRE(run(with({"sample", "--truth", truth, "-o", (d / "smp").string()}, kSmall)).code == 0);
    const std::string obs = (d / "smp" / "observations.csv").string();
    Result r = run(with({"train", "--obs", obs, "--lambda-search", "-o", (d / "x").string()}, kSmall));
    CHECK(r.code == 1);
    r = run(with({"train", "--obs", obs, "--truth", truth, "--lambda-search", "--epochs", "2", "-o",
                  (d / "y").string()},
                 kSmall));
    REQUIRE(r.code == 0);
    std::ifstream s(d / "y" / "lambda_search.csv");
    int rows = -1;
    for (std::string line; std::getline(s, line);) ++rows;
    CHECK(rows == 7);
}

TEST_CASE("reruns are byte identical") {
    const fs::path a = dir("rep_a"), b = dir("rep_b");
    for (const auto& d : {a, b}) {
        REQUIRE(run(with({"simulate", "-o", (d / "sim").string()}, kSmall)).code == 0);
        REQUIRE(run(with({"sample", "--truth", (d / "sim" / "truth.csv").string(), "-o", (d / "smp").string()},
                         kSmall))
                    .code == 0);
        REQUIRE(run(with({"train", "--obs", (d / "smp" / "observations.csv").string(), "--epochs", "3", "-o",
                          (d / "trn").string()},
                         kSmall))
                    .code == 0);
    }
    for (const char* sub : {"sim", "smp", "trn"}) {
        CHECK(slurp(a / sub / "manifest.json") == slurp(b / sub / "manifest.json"));
    }
}

}

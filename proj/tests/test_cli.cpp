#include "fbflow/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace fbflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("fbflow-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

fs::path write_text(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

Run run(const std::string& cmd, const std::optional<fs::path>& cfg, const fs::path& out_dir) {
    std::ostringstream out, err;
    RunOptions o;
    o.out_dir = out_dir;
    o.quiet = false;
    const int code = execute(cmd, cfg, o, out, err);
    return {code, out.str(), err.str()};
}

Run run_json(const std::string& cmd, const json& cfg, const TempDir& d) {
    return run(cmd, write_text(d.path, "config.json", cfg.dump()), d.path / "out");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const json kFb1 = {{"problem", "skew-rotation"},
                   {"system", "fb1"},
                   {"params", {{"alpha", 0.5}, {"eta", 1.0}, {"lambda", 1.0}}},
                   {"initial", {{"x0", {5.0, -3.0}}}},
                   {"integrator", {{"t_end", 20.0}}}};

}  // namespace

TEST_CASE("verify writes all artifacts and reports C") {
    TempDir d;
    const Run r = run_json("verify", kFb1, d);
    CHECK(r.code == kExitOk);
    for (const char* f : {"certificate.json", "trajectory.csv", "report.json", "plot.gp"}) {
        CHECK(fs::exists(d.path / "out" / f));
    }
    const json rep = json::parse(slurp(d.path / "out" / "report.json"));
    CHECK(rep["certificate"]["constants"]["C"].get<double>() == doctest::Approx(0.5));
    CHECK(rep["envelope_check"]["pass"].get<bool>());
    CHECK(slurp(d.path / "out" / "plot.gp").find("set logscale y") != std::string::npos);
}

TEST_CASE("verify is deterministic") {
    TempDir a, b;
    json cfg = kFb1;
    cfg.erase("initial");
    cfg["seed"] = 42;
    REQUIRE(run_json("verify", cfg, a).code == kExitOk);
    REQUIRE(run_json("verify", cfg, b).code == kExitOk);
    CHECK(slurp(a.path / "out" / "trajectory.csv") == slurp(b.path / "out" / "trajectory.csv"));
}

TEST_CASE("certify failure names the violated inequality") {
    TempDir d;
    json cfg = kFb1;
    cfg["params"]["alpha"] = 2.0;
    const Run r = run_json("certify", cfg, d);
    CHECK(r.code == kExitFailed);
    CHECK(r.err.find("α < 2ρβ²λ̲") != std::string::npos);
    const json j = json::parse(slurp(d.path / "out" / "certificate.json"));
    CHECK_FALSE(j["certified"].get<bool>());
}

TEST_CASE("list shows the registry") {
    TempDir d;
    const Run r = run("list", std::nullopt, d.path);
    CHECK(r.code == kExitOk);
    std::istringstream is(r.out);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) n += line.empty() ? 0 : 1;
    CHECK(n >= 3);
    CHECK(r.out.find("skew-rotation") != std::string::npos);
}

TEST_CASE("exit codes") {
    TempDir d;
    json unknown = kFb1;
    unknown["problem"] = "no-such-problem";
    CHECK(run_json("verify", unknown, d).code == kExitUnknownProblem);

    const json incompatible = {{"problem", "sc-lasso-20d"}, {"system", "grad1"}, {"params", {{"alpha", 0.1}}}};
    CHECK(run_json("verify", incompatible, d).code == kExitIncompatible);

    CHECK(run(
              "verify", write_text(d.path, "bad.json", "{\"problem\": \"skew-rotation\", "), d.path / "out")
              .code == kExitMalformed);

    json override_rho = kFb1;
    override_rho["params"]["rho"] = 2.0;
    CHECK(run_json("verify", override_rho, d).code == kExitMalformed);

    const json fb2_eta = {{"problem", "skew-rotation"}, {"system", "fb2"}, {"params", {{"alpha", 0.5}, {"delta", 0.5}, {"eta", 1.0}}}};
    CHECK(run_json("verify", fb2_eta, d).code == kExitMalformed);

    CHECK(run("verify", std::nullopt, d.path).code != kExitOk);
    CHECK(run("frobnicate", std::nullopt, d.path).code != kExitOk);
}

TEST_CASE("suggested second-order constants verify") {
    TempDir d;
    const json fb2 = {{"problem", "skew-rotation"},
                      {"system", "fb2"},
                      {"params", {{"alpha", 0.5}, {"delta", 0.5}}},
                      {"initial", {{"x0", {2.0, 2.0}}}},
                      {"integrator", {{"t_end", 15.0}}}};
    const Run r2 = run_json("verify", fb2, d);
    CHECK_MESSAGE(r2.code == kExitOk, r2.err);

    const json grad2 = {{"problem", "isotropic-quadratic-1d"},
                        {"system", "grad2"},
                        {"initial", {{"x0", {1.0}}}},
                        {"integrator", {{"t_end", 15.0}}}};
    const Run r3 = run_json("verify", grad2, d);
    CHECK_MESSAGE(r3.code == kExitOk, r3.err);
}

TEST_CASE("simulate and sweep write their CSVs") {
    TempDir d;
    CHECK(run_json("simulate", kFb1, d).code == kExitOk);
    CHECK(fs::exists(d.path / "out" / "trajectory.csv"));

    json sweep = kFb1;
    sweep["sweep"] = {{"alpha", {{"min", 0.1}, {"max", 3.0}, {"count", 4}}}, {"eta", {{"min", 0.1}, {"max", 10.0}, {"count", 3}, {"scale", "log"}}}};
    CHECK(run_json("sweep", sweep, d).code == kExitOk);
    const std::string csv = slurp(d.path / "out" / "sweep.csv");
    std::istringstream is(csv);
    std::string header, line;
    std::getline(is, header);
    CHECK(header.rfind("alpha,eta,feasible", 0) == 0);
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 12);
}

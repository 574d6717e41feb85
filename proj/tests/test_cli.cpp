#include "cfx/cli.hpp"
#include "cfx/errors.hpp"
#include "cfx/product_space.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace cfx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(CFX_SOURCE_DIR) / "tools" / "configs";

/// Fresh scratch directory per test.
fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("cfx_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json load(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

cli::Overrides to(const fs::path& out) { return cli::Overrides{std::nullopt, out.string(), std::nullopt}; }

int run_binary(const std::string& args) {
    const std::string cmd = std::string(CFX_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("check: swap is nonexpansive but not componentwise") {
    auto out = scratch("swap");
    std::ostringstream log;
    int code = cli::cmd_check(load(kConfigs / "swap_check.json"), to(out), kConfigs, log);
    CHECK(code == cli::kRefuted);
    json doc = load(out / "reports.json");
    REQUIRE(doc["reports"].size() == 3);
    CHECK(doc["reports"][0]["verdict"] == "pass");
    CHECK(doc["reports"][1]["verdict"] == "fail");
    CHECK(doc["passed"] == false);
    REQUIRE(doc["reports"][1]["witness_files"].size() == 2);
    const std::string wx = doc["reports"][1]["witness_files"][0];
    const std::string wy = doc["reports"][1]["witness_files"][1];
    std::ifstream fx(out / wx), fy(out / wy);
    ProductVector x = read_vector(fx), y = read_vector(fy);
    // The witness pair violates |(Tx)_0 - (Ty)_0| <= |x_0 - y_0| for T = swap.
    const double violation = std::abs(x.values()[1] - y.values()[1]) - std::abs(x.values()[0] - y.values()[0]);
    CHECK(violation == doctest::Approx(doc["reports"][1]["max_violation"].get<double>()));
}

TEST_CASE("check: identity passes everything") {
    auto out = scratch("identity");
    std::ostringstream log;
    CHECK(cli::cmd_check(load(kConfigs / "identity_check.json"), to(out), kConfigs, log) == cli::kPass);
    json doc = load(out / "reports.json");
    CHECK(doc["passed"] == true);
    CHECK(doc["reports"].size() == 2 + 5 + 2);
}

TEST_CASE("check: componental contraction versus global contraction") {
    auto out = scratch("contraction");
    std::ostringstream log;
    CHECK(cli::cmd_check(load(kConfigs / "contraction_check.json"), to(out), kConfigs, log) ==
          cli::kRefuted);
    json doc = load(out / "reports.json");
    CHECK(doc["reports"][0]["verdict"] == "pass");
    CHECK(doc["reports"][1]["verdict"] == "fail");
}

TEST_CASE("check: modulus estimate on the scaled swap") {
    auto out = scratch("modulus");
    json cfg = json::parse(R"({
        "operator": {"dims": [1, 1], "operator": {"kind": "scaled_swap_example"}},
        "checks": [{"property": "modulus", "component": 0, "max": 0.99},
                   {"property": "modulus", "max": 0.5}],
        "sampler": {"pinned_pairs": [[[0, 0], [1, 5]]]}})");
    std::ostringstream log;
    CHECK(cli::cmd_check(cfg, to(out), ".", log) == cli::kRefuted);
    json doc = load(out / "reports.json");
    CHECK(doc["reports"][0]["parameters"]["estimate"].get<double>() >= 2.5);
    CHECK(doc["reports"][1]["verdict"] == "pass");
}

TEST_CASE("config validation") {
    std::ostringstream log;
    auto out = scratch("invalid");
    json cfg = load(kConfigs / "identity_check.json");
    cfg["unexpected"] = 1;
    CHECK_THROWS_AS(cli::cmd_check(cfg, to(out), kConfigs, log), ParseError);
    json bad_check = load(kConfigs / "identity_check.json");
    bad_check["checks"][0]["lamda"] = 1.0;
    CHECK_THROWS_AS(cli::cmd_check(bad_check, to(out), kConfigs, log), ParseError);
    json bad_prop = load(kConfigs / "identity_check.json");
    bad_prop["checks"][0]["property"] = "monotone";
    CHECK_THROWS_AS(cli::cmd_check(bad_prop, to(out), kConfigs, log), ParseError);
    json solve = load(kConfigs / "drop_planted.json");
    solve["stop"]["tolerance"] = 1.0;
    CHECK_THROWS_AS(cli::cmd_solve(solve, to(out), kConfigs, log), ParseError);
    json method = load(kConfigs / "drop_planted.json");
    method["method"] = "jacobi";
    CHECK_THROWS_AS(cli::cmd_solve(method, to(out), kConfigs, log), ParameterError);
}

TEST_CASE("solve: picard converges in the watched component") {
    auto out = scratch("picard");
    std::ostringstream log;
    CHECK(cli::cmd_solve(load(kConfigs / "contraction_picard.json"), to(out), kConfigs, log) ==
          cli::kPass);
    json s = load(out / "summary.json");
    CHECK(s["stop_reason"] == "step_tolerance");
    CHECK(std::abs(s["final_iterate"][0].get<double>() - 6.0) <= 1e-11);
    CHECK(s["final_iterate"][1] == 0.0);
    const std::string csv = slurp(out / "history.csv");
    CHECK(csv.rfind("k,residual,step_0,dist_0,step_1,dist_1\n0,,,,,\n1,,3,,0,\n", 0) == 0);
}

TEST_CASE("solve: divergence exits with code 3 and keeps the partial history") {
    auto out = scratch("diverge");
    std::ostringstream log;
    CHECK(cli::cmd_solve(load(kConfigs / "divergent_picard.json"), to(out), kConfigs, log) ==
          cli::kDiverged);
    json s = load(out / "summary.json");
    CHECK(s["stop_reason"] == "diverged");
    CHECK(s["last_finite"][1].get<double>() > 1e300);
    CHECK(fs::exists(out / "history.csv"));
}

TEST_CASE("solve: drop on a diagonal system from files") {
    auto dir = scratch("diag");
    {
        std::ofstream a(dir / "A.mtx");
        a << "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 2\n2 2 -1\n3 3 4\n";
        std::ofstream b(dir / "b.txt");
        b << "2\n3\n-8\n";
        std::ofstream c(dir / "cfg.json");
        c << R"({"method": "drop", "system": {"matrix": "A.mtx", "rhs": "b.txt"}, "out": "o"})";
    }
    std::ostringstream log;
    CHECK(cli::cmd_solve(load(dir / "cfg.json"), {}, dir, log) == cli::kPass);
    json s = load(dir / "o" / "summary.json");
    CHECK(s["iterations"] == 1);
    CHECK(s["final_residual"] == 0.0);
    CHECK(s["final_iterate"] == json({1.0, -3.0, -2.0}));
}

TEST_CASE("solve: feasibility instance with Fejer monitoring") {
    auto out = scratch("cfp");
    std::ostringstream log;
    CHECK(cli::cmd_solve(load(kConfigs / "cfp_solve.json"), to(out), kConfigs, log) == cli::kPass);
    json s = load(out / "summary.json");
    CHECK(s["fejer"]["verdict"] == "pass");
    CHECK(s["fejer_global"]["verdict"] == "pass");
}

TEST_CASE("compare: diagonal and single-row systems") {
    std::ostringstream log;
    auto dir = scratch("compare_diag");
    {
        std::ofstream a(dir / "A.mtx");
        a << "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 2\n3 3 3\n";
        std::ofstream b(dir / "b.txt");
        b << "1\n1\n1\n";
        std::ofstream a1(dir / "A1.mtx");
        a1 << "%%MatrixMarket matrix coordinate real general\n1 3 3\n1 1 1\n1 2 -1\n1 3 2\n";
        std::ofstream b1(dir / "b1.txt");
        b1 << "4\n";
    }
    json cfg = {{"system", {{"matrix", "A.mtx"}, {"rhs", "b.txt"}}}, {"target", 1e-6}, {"out", "o"}};
    CHECK(cli::cmd_compare(cfg, {}, dir, log) == cli::kPass);
    json s = load(dir / "o" / "summary.json");
    CHECK(s["drop"]["first_reaching_target"] == 1);
    CHECK(s["cimmino"]["first_reaching_target"].get<int>() > 1);

    json one = {{"system", {{"matrix", "A1.mtx"}, {"rhs", "b1.txt"}}}, {"target", 1e-6}, {"out", "o1"}};
    CHECK(cli::cmd_compare(one, {}, dir, log) == cli::kPass);
    std::istringstream csv(slurp(dir / "o1" / "compare.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "k,drop_relative_residual,cimmino_relative_residual");
    while (std::getline(csv, line)) {
        auto first = line.find(','), second = line.rfind(',');
        CHECK(line.substr(first + 1, second - first - 1) == line.substr(second + 1));
    }
}

TEST_CASE("compare: sparsity speeds up DROP on the shipped instance") {
    auto out = scratch("compare_planted");
    std::ostringstream log;
    CHECK(cli::cmd_compare(load(kConfigs / "compare_planted.json"), to(out), kConfigs, log) ==
          cli::kPass);
    json s = load(out / "summary.json");
    // Recorded once from the default seed.
    CHECK(s["drop"]["first_reaching_target"] == 142);
    CHECK(s["cimmino"]["first_reaching_target"] == 5397);
}

TEST_CASE("flags override the config") {
    auto out = scratch("flags");
    std::ostringstream log;
    cli::Overrides f{std::nullopt, out.string(), std::size_t{5}};
    CHECK(cli::cmd_solve(load(kConfigs / "drop_planted.json"), f, kConfigs, log) == cli::kPass);
    json s = load(out / "summary.json");
    CHECK(s["iterations"] == 5);
    CHECK(s["stop_reason"] == "max_iterations");

    auto a = scratch("seed_a"), b = scratch("seed_b");
    json cfg = load(kConfigs / "swap_check.json");
    cli::cmd_check(cfg, cli::Overrides{1, a.string(), std::nullopt}, kConfigs, log);
    cli::cmd_check(cfg, cli::Overrides{2, b.string(), std::nullopt}, kConfigs, log);
    CHECK(load(a / "reports.json")["reports"][0]["seed"] == 1);
    CHECK(slurp(a / "reports.json") != slurp(b / "reports.json"));
}

TEST_CASE("outputs are byte-identical across reruns") {
    auto a = scratch("det_a"), b = scratch("det_b");
    std::ostringstream log;
    for (const auto& dir : {a, b}) {
        cli::cmd_check(load(kConfigs / "swap_check.json"), to(dir / "check"), kConfigs, log);
        cli::cmd_solve(load(kConfigs / "cfp_solve.json"), to(dir / "solve"), kConfigs, log);
    }
    CHECK(slurp(a / "check" / "reports.json") == slurp(b / "check" / "reports.json"));
    CHECK(slurp(a / "check" / "witness_1_x.txt") == slurp(b / "check" / "witness_1_x.txt"));
    CHECK(slurp(a / "solve" / "history.csv") == slurp(b / "solve" / "history.csv"));
    CHECK(slurp(a / "solve" / "summary.json") == slurp(b / "solve" / "summary.json"));
}

TEST_CASE("atomic writes leave no temporary files") {
    auto dir = scratch("atomic");
    cli::write_atomically(dir / "f.txt", "one\n");
    cli::write_atomically(dir / "f.txt", "two\n");
    CHECK(slurp(dir / "f.txt") == "two\n");
    CHECK_FALSE(fs::exists(dir / "f.txt.tmp"));
}

TEST_CASE("binary exit codes") {
    auto out = scratch("binary");
    const std::string cfg = (kConfigs / "identity_check.json").string();
    CHECK(run_binary("check --config " + cfg + " --out " + (out / "id").string()) == 0);
    CHECK(run_binary("check --config " + (kConfigs / "swap_check.json").string() + " --out " +
                     (out / "swap").string()) == 1);
    CHECK(run_binary("solve --config " + (kConfigs / "divergent_picard.json").string() + " --out " +
                     (out / "div").string()) == 3);
    CHECK(run_binary("check --config " + (out / "missing.json").string()) == 2);
    CHECK(run_binary("check") == 2);
    CHECK(run_binary("frobnicate --config x") == 2);
    {
        std::ofstream bad(out / "bad.json");
        bad << "{ not json";
    }
    CHECK(run_binary("solve --config " + (out / "bad.json").string()) == 2);
    CHECK(run_binary("--help") == 0);
}

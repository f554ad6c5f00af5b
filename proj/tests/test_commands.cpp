#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlap/commands.hpp"
#include "nlap/config.hpp"
#include "nlap/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace nlap;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "nlap_cmd_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig cfg_from(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string base_cfg_nomesh(const fs::path& out, const std::string& extra) {
    return std::string("problem.N = 2\nproblem.p = 4\nproblem.q = 1.5\n"
                       "problem.alpha = 1\nproblem.a1 = 1\n"
                       "weight.kind = exponential\nweight.rate = 1\n"
                       "solve.tol = 1e-9\nseed = 7\n"
                       "output.dir = ") + out.string() + "\n" + extra;
}

std::string base_cfg(const fs::path& out, const std::string& extra) {
    return base_cfg_nomesh(out, "mesh.R = 8\nmesh.M = 400\n" + extra);
}

int cli(std::vector<std::string> args) {
    std::vector<const char*> argv;
    argv.push_back("nlap");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(int(argv.size()), argv.data());
}

} // namespace

TEST_CASE("solve: artifacts, report row, determinism") {
    fs::path out = fresh_dir("solve1");
    RunConfig cfg = cfg_from(base_cfg(out,
        "problem.lambda_frac = 0.01\nschedule.k = 10 100\n"));
    cmd_solve(cfg);

    CHECK(fs::exists(out / "solution.csv"));
    CHECK(fs::exists(out / "report.csv"));
    CHECK(fs::exists(out / "ledger.txt"));

    std::string report = slurp(out / "report.csv");
    CHECK(report.rfind("# nlap-galerkin v", 0) == 0);
    CHECK(report.find("lambda,R,strauss_k,reg_n,residual,w1n,sup,") != std::string::npos);
    CHECK(report.find("\n0.0042576") != std::string::npos); // resolved lambda

    std::string ledger = slurp(out / "ledger.txt");
    CHECK(ledger.find("lambda_star ") != std::string::npos);
    CHECK(ledger.find("Theta ") != std::string::npos);
    CHECK(ledger.find("sup_bound_at_w1n ") != std::string::npos);

    // identical run reproduces identical bytes
    fs::path out2 = fresh_dir("solve2");
    RunConfig cfg2 = cfg_from(base_cfg(out2,
        "problem.lambda_frac = 0.01\nschedule.k = 10 100\n"));
    cmd_solve(cfg2);
    CHECK(slurp(out / "solution.csv") == slurp(out2 / "solution.csv"));
    CHECK(slurp(out / "report.csv") == slurp(out2 / "report.csv"));
    CHECK(slurp(out / "ledger.txt") == slurp(out2 / "ledger.txt"));
}

TEST_CASE("solve: lambda at twice the threshold refuses with a record") {
    fs::path out = fresh_dir("solve_refuse");
    // absolute lambda = 2 lambda* for the frozen constants of this config
    RunConfig cfg = cfg_from(base_cfg(out,
        "problem.lambda = 0.9\nschedule.k = 10 100\n"));
    bool threw = false;
    try {
        cmd_solve(cfg);
    } catch (const CertificateFailure&) {
        threw = true;
    }
    CHECK(threw);
    std::string rec = slurp(out / "error.txt");
    CHECK(rec.rfind("kind certificate_failure", 0) == 0);
    CHECK(rec.find("varsigma") != std::string::npos);
}

TEST_CASE("sweep: decreasing norms and recomputable bound columns") {
    fs::path out = fresh_dir("sweep1");
    RunConfig cfg = cfg_from(base_cfg(out,
        "sweep.lambda_frac = 0.5 0.25 0.125\nschedule.k = 10 100\n"));
    cmd_sweep_lambda(cfg);
    std::string csv = slurp(out / "sweep.csv");
    CHECK(csv.find("lambda,w1n,sup,residual,") != std::string::npos);

    // parse rows: lambda and w1n strictly decreasing, all ok flags set
    std::istringstream is(csv);
    std::string line;
    double prev_l = 1e300, prev_w = 1e300;
    int rows = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'l') continue;
        std::istringstream row(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(row, tok, ',')) cols.push_back(tok);
        REQUIRE(cols.size() >= 10);
        double l = std::stod(cols[0]), w = std::stod(cols[1]);
        CHECK(l < prev_l);
        CHECK(w < prev_w);
        prev_l = l;
        prev_w = w;
        CHECK(cols.back() == "ok");
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("sweep requires a sweep list") {
    fs::path out = fresh_dir("sweep_missing");
    RunConfig cfg = cfg_from(base_cfg(out, "problem.lambda_frac = 0.5\n"));
    CHECK_THROWS_AS(cmd_sweep_lambda(cfg), ParamError);
}

TEST_CASE("threshold: certified column flips once and stays on") {
    fs::path out = fresh_dir("thr1");
    RunConfig cfg = cfg_from(base_cfg(out,
        "threshold.R = 1\nthreshold.delta = 0.1\nthreshold.M = 200\n"
        "threshold.lambda = 0.25 1 4 16 64\n"));
    cmd_threshold(cfg);
    std::string csv = slurp(out / "threshold.csv");
    CHECK(csv.find("# first_certified_lambda 16") != std::string::npos);

    std::istringstream is(csv);
    std::string line;
    int certified = 0, uncertified = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'l') continue;
        if (line.find(",1,ok") != std::string::npos) ++certified;
        if (line.find(",0,ok") != std::string::npos) ++uncertified;
    }
    CHECK(certified == 2);   // 64 and 16
    CHECK(uncertified == 3); // 4, 1, 0.25
}

TEST_CASE("exhaust: per-ball rows plus decay tables") {
    fs::path out = fresh_dir("exh1");
    RunConfig cfg = cfg_from(base_cfg(out,
        "problem.lambda_frac = 0.01\nmesh.R_list = 2 4\n"
        "mesh.nodes_per_unit = 25\nschedule.k = 10 100\n"));
    cmd_exhaust(cfg);
    std::string csv = slurp(out / "exhaust.csv");
    CHECK(csv.find("# rho_tilde ") != std::string::npos);
    CHECK(csv.find("# norms_ok 1") != std::string::npos);
    CHECK(fs::exists(out / "annulus_sup.csv"));
    CHECK(fs::exists(out / "window_diff.csv"));

    std::string ann = slurp(out / "annulus_sup.csv");
    int rows = 0;
    for (char ch : ann)
        if (ch == '\n') ++rows;
    CHECK(rows >= 5); // header + version + 4 annuli on B_4
}

TEST_CASE("eigen: CSV carries the disk eigenvalue") {
    fs::path out = fresh_dir("eig1");
    RunConfig cfg = cfg_from(base_cfg_nomesh(out, "mesh.R = 1\nmesh.M = 200\n"));
    cmd_eigen(cfg);
    std::string csv = slurp(out / "eigen.csv");
    CHECK(csv.find("N,R,M,sigma1") != std::string::npos);
    std::size_t pos = csv.rfind('\n', csv.size() - 2);
    std::string last = csv.substr(pos + 1);
    std::istringstream row(last);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(row, tok, ',')) cols.push_back(tok);
    REQUIRE(cols.size() == 4);
    CHECK(std::stod(cols[3]) == doctest::Approx(5.78318596294679).epsilon(2e-3));
    CHECK(fs::exists(out / "eigenfunction.csv"));
}

TEST_CASE("cli: exit codes for the config error family") {
    fs::path out = fresh_dir("cli1");
    CHECK(cli({"solve"}) == 2);                              // --config missing
    CHECK(cli({"solve", "--config", "/nonexistent.cfg"}) == 2);

    fs::path bad = out / "bad.cfg";
    std::ofstream(bad) << "problem.N = 2\nproblem.q = 2.5\n";
    CHECK(cli({"solve", "--config", bad.string()}) == 2);

    fs::path unknown = out / "unknown.cfg";
    std::ofstream(unknown) << "problem.N = 2\nbogus = 1\n";
    CHECK(cli({"eigen", "--config", unknown.string()}) == 2);
}

TEST_CASE("cli: happy path and flag overrides") {
    fs::path out = fresh_dir("cli2");
    fs::path cfgfile = out / "run.cfg";
    std::ofstream(cfgfile) << base_cfg_nomesh(out / "ignored",
                                              "mesh.R = 1\nmesh.M = 200\n");
    // --out overrides output.dir after the subcommand name
    CHECK(cli({"eigen", "--config", cfgfile.string(), "--out",
               (out / "real").string()}) == 0);
    CHECK(fs::exists(out / "real" / "eigen.csv"));
    CHECK_FALSE(fs::exists(out / "ignored" / "eigen.csv"));
}

TEST_CASE("cli: certificate refusal surfaces as exit 3") {
    fs::path out = fresh_dir("cli3");
    fs::path cfgfile = out / "run.cfg";
    std::ofstream(cfgfile) << base_cfg(out, "problem.lambda = 0.9\n"
                                            "schedule.k = 10 100\n");
    CHECK(cli({"solve", "--config", cfgfile.string()}) == 3);
    CHECK(fs::exists(out / "error.txt"));
}

TEST_CASE("solve context requires a lambda") {
    fs::path out = fresh_dir("nolambda");
    RunConfig cfg = cfg_from(base_cfg(out, ""));
    CHECK_THROWS_AS(cmd_solve(cfg), ParamError);
}

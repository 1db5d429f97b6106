#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WHLS_CLI_PATH) + " " + args;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json read_report(const fs::path& dir) {
    std::ifstream in(dir / "report.json");
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::path("cli-out") / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

} // namespace

TEST_CASE("cli params reports derived exponents for the default set") {
    const fs::path dir = fresh_dir("params");
    CHECK(run_cli("--out " + dir.string() + " params") == 0);
    const json rep = read_report(dir);
    CHECK(rep["results"]["validity"]["valid"].get<bool>());
    CHECK(rep["results"]["derived"]["q"].get<double>() ==
          Catch::Approx(4.0).epsilon(1e-12));
    CHECK(rep["results"]["derived"]["gamma"].get<double>() ==
          Catch::Approx(0.5).epsilon(1e-12));
    CHECK(rep["config"]["n"].get<int>() == 2);
}

TEST_CASE("cli rejects a missing config file") {
    const fs::path dir = fresh_dir("missing");
    CHECK(run_cli("--config /nonexistent/config.json --out " + dir.string() +
                  " params") == 1);
}

TEST_CASE("cli accepts key=value configs and flag overrides") {
    const fs::path dir = fresh_dir("kv");
    write_file(dir / "cfg.txt",
               "n = 1\nk = 0\nlambda = 0.5\nbeta = 0\np = 1.3333333333333333\n"
               "r = 1.3333333333333333\n# comment\n");
    CHECK(run_cli("--config " + (dir / "cfg.txt").string() + " --out " +
                  dir.string() + " params") == 0);
    const json rep = read_report(dir);
    CHECK(rep["results"]["validity"]["valid"].get<bool>());
    CHECK(rep["config"]["k"].get<int>() == 0);
}

TEST_CASE("cli estimate writes maximizer profiles") {
    const fs::path dir = fresh_dir("estimate");
    CHECK(run_cli("--out " + dir.string() + " --grid-m 24 --tol 1e-9 estimate") ==
          0);
    const json rep = read_report(dir);
    CHECK(rep["results"]["estimate"]["nHat"].get<double>() > 0.0);
    CHECK(rep["results"]["estimate"]["status"].get<std::string>() == "converged");
    CHECK(std::abs(rep["results"]["constantRelation"]["ratio"].get<double>() -
                   1.0) < 1e-9);
    CHECK(fs::exists(dir / "fsharp.csv"));
    CHECK(fs::exists(dir / "gsharp.csv"));
    std::ifstream csv(dir / "fsharp.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "radius,value");
}

TEST_CASE("cli probe exit codes distinguish expected divergence") {
    const fs::path dir = fresh_dir("probe");
    write_file(dir / "cfg.json",
               R"({"n":2,"k":1,"lambda":1.25,"beta":0.0,"p":2.0,"r":1.3333333333333333})");
    CHECK(run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                  dir.string() + " probe lambda-range") == 2);
    const json rep = read_report(dir);
    CHECK(rep["results"]["probe"]["verdict"].get<std::string>() == "DIVERGES");
    CHECK(fs::exists(dir / "observations.csv"));

    CHECK(run_cli("--out " + dir.string() + " probe no-such-probe") == 1);
}

TEST_CASE("cli dyadic probe holds") {
    const fs::path dir = fresh_dir("dyadic");
    CHECK(run_cli("--out " + dir.string() + " --grid-m 32 probe dyadic") == 0);
    CHECK(read_report(dir)["results"]["probe"]["verdict"].get<std::string>() ==
          "HOLDS");
}

TEST_CASE("cli reports are deterministic modulo wall time") {
    const fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
    const std::string args = " --grid-m 16 --seed 5 rearrange";
    CHECK(run_cli("--out " + d1.string() + args) == 0);
    CHECK(run_cli("--out " + d2.string() + args) == 0);
    json a = read_report(d1), b = read_report(d2);
    a.erase("wallTimeMs");
    b.erase("wallTimeMs");
    CHECK(a.dump() == b.dump());
}

TEST_CASE("cli starnorm and rearrange emit norms") {
    const fs::path dir = fresh_dir("star");
    write_file(dir / "cfg.json", R"({"profile":"indicator","n":1,"k":0,
        "lambda":0.5,"beta":0.0,"p":1.3333333333333333,"r":1.3333333333333333})");
    CHECK(run_cli("--config " + (dir / "cfg.json").string() + " --out " +
                  dir.string() + " starnorm") == 0);
    const json rep = read_report(dir);
    CHECK(rep["results"]["starNorm"]["value"].get<double>() > 0.0);

    const fs::path dir2 = fresh_dir("rearr");
    CHECK(run_cli("--out " + dir2.string() + " --grid-m 16 --seed 3 rearrange") ==
          0);
    const json rep2 = read_report(dir2);
    const auto& n = rep2["results"]["norms"]["p=2"];
    CHECK(n["before"].get<double>() ==
          Catch::Approx(n["after"].get<double>()).epsilon(1e-12));
    CHECK(fs::exists(dir2 / "rearranged.csv"));
}

TEST_CASE("cli batch summarises members and propagates the worst exit") {
    const fs::path dir = fresh_dir("batch");
    write_file(dir / "batch.json", R"({"experiments":[
        {"op":"params"},
        {"op":"probe:lambda-range","n":2,"k":1,"lambda":1.25,"beta":0.0,
         "p":2.0,"r":1.3333333333333333}
    ]})");
    CHECK(run_cli("--config " + (dir / "batch.json").string() + " --out " +
                  dir.string() + " batch") == 2);
    std::ifstream csv(dir / "summary.csv");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3); // header + 2 members

    const fs::path dir2 = fresh_dir("batch-empty");
    write_file(dir2 / "batch.json", R"({"experiments":[]})");
    CHECK(run_cli("--config " + (dir2 / "batch.json").string() + " --out " +
                  dir2.string() + " batch") == 0);

    const fs::path dir3 = fresh_dir("batch-bad");
    write_file(dir3 / "batch.json", R"({"experiments":[
        {"op":"no-such-op"},
        {"op":"params"}
    ]})");
    CHECK(run_cli("--config " + (dir3 / "batch.json").string() + " --out " +
                  dir3.string() + " batch") == 1);
    std::ifstream csv3(dir3 / "summary.csv");
    int rows3 = 0;
    while (std::getline(csv3, line))
        if (!line.empty()) ++rows3;
    CHECK(rows3 == 3); // the good member still ran
}

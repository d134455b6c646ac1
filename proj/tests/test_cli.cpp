// End-to-end tests for the command-line binary: exit codes, CSV and JSON
// artifacts, and determinism across seeds and thread counts. The binary is
// expected next to this test executable (both live in the build directory).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

int run(const std::string& args) {
    std::string cmd = "./pottspair " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::vector<std::string> csv_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

constexpr const char* kHeader = "experiment,graph,q,qp,a,b,estimand,value,stderr,n,seed";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("") == 2);
    CHECK(run("bogus") == 2);
    CHECK(run("--help") == 0);
    CHECK(run("verify --help") == 0);
    CHECK(run("verify --config cli_no_such_file.json") == 2);

    put("cli_empty_grid.json", R"({"grid":{"a":[]}})");
    CHECK(run("verify --config cli_empty_grid.json --out cli_out_eg") == 2);

    put("cli_no_sizes.json", R"({"grid":{"q":[2],"qp":[2],"a":[0.5],"b":[0.5]}})");
    CHECK(run("variance-scan --config cli_no_sizes.json --out cli_out_ns") == 2);

    put("cli_prism_sizes.json", R"({"graph":{"kind":"prism"},"sizes":[1,2]})");
    CHECK(run("variance-scan --config cli_prism_sizes.json --out cli_out_ps") == 2);

    put("cli_bad_graph.json", R"({"graph":{"kind":"moebius"}})");
    CHECK(run("verify --config cli_bad_graph.json --out cli_out_bg") == 2);
}

TEST_CASE("verify default suite passes and writes reports") {
    CHECK(run("verify --out cli_out_verify") == 0);
    std::string reports = slurp("cli_out_verify/reports.json");
    CHECK(reports.find("\"pass\":true") != std::string::npos);
    CHECK(reports.find("\"pass\":false") == std::string::npos);
    CHECK(reports.find("potts-duality") != std::string::npos);
    CHECK(reports.find("height-variance-identity") != std::string::npos);
}

TEST_CASE("verify on a torus grid passes") {
    put("cli_torus.json",
        R"({"graph":{"kind":"torus","n":2},"grid":{"q":[2],"qp":[2],"a":[0.5],"b":[0.5]}})");
    CHECK(run("verify --config cli_torus.json --out cli_out_torus") == 0);
    std::string reports = slurp("cli_out_torus/reports.json");
    CHECK(reports.find("fk-reduction") != std::string::npos);
    CHECK(reports.find("\"pass\":false") == std::string::npos);
}

TEST_CASE("corrupting the contour weight is detected") {
    CHECK(run("verify --mutation b-squared --out cli_out_mut") == 1);
    std::string reports = slurp("cli_out_mut/reports.json");
    CHECK(reports.find("mutated b->b^2") != std::string::npos);
    CHECK(reports.find("\"pass\":false") != std::string::npos);
    CHECK(run("verify --mutation nonsense --out cli_out_mut2") == 2);
}

TEST_CASE("sample smoke run: schema, rows, determinism") {
    put("cli_sample.json", R"({
        "experiment": "smoke",
        "graph": {"kind": "box", "n": 1},
        "grid": {"q": [2], "qp": [2], "a": [0.5], "b": [0.5]},
        "sampler": {"sweeps": 1000, "burn_in": 100, "thin": 1, "chains": 2},
        "seed": 7
    })");
    CHECK(run("sample --config cli_sample.json --out cli_out_s1 --threads 1") == 0);
    CHECK(run("sample --config cli_sample.json --out cli_out_s2 --threads 4") == 0);
    CHECK(run("sample --config cli_sample.json --out cli_out_s3 --threads 4") == 0);
    CHECK(run("sample --config cli_sample.json --out cli_out_s4 --seed 99") == 0);

    std::vector<std::string> lines = csv_lines("cli_out_s1/results.csv");
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == kHeader);
    std::string body = slurp("cli_out_s1/results.csv");
    for (const char* estimand :
         {"var_dh", "n_nonzero", "n_prime", "surround", "mean_dh", "conn", "sigma0_sq"})
        CHECK(body.find(std::string(",") + estimand + ",") != std::string::npos);
    for (const std::string& line : lines)
        if (line != lines[0]) CHECK(line.substr(0, 22) == "smoke,box(1),2,2,0.5,0");

    CHECK(slurp("cli_out_s1/results.csv") == slurp("cli_out_s2/results.csv"));
    CHECK(slurp("cli_out_s2/results.csv") == slurp("cli_out_s3/results.csv"));
    CHECK(slurp("cli_out_s1/results.csv") != slurp("cli_out_s4/results.csv"));

    std::string meta = slurp("cli_out_s1/meta.json");
    CHECK(meta.find("\"csv_schema\": 1") != std::string::npos);
    CHECK(meta.find("\"command\": \"sample\"") != std::string::npos);
}

TEST_CASE("variance scan emits one block per size") {
    put("cli_scan.json", R"({
        "experiment": "scan",
        "graph": {"kind": "box"},
        "grid": {"q": [2], "qp": [2], "a": [0.5], "b": [0.5]},
        "sampler": {"sweeps": 400, "burn_in": 100, "thin": 2, "chains": 2},
        "sizes": [1, 2],
        "seed": 3
    })");
    CHECK(run("variance-scan --config cli_scan.json --out cli_out_scan --threads 4") == 0);
    std::vector<std::string> lines = csv_lines("cli_out_scan/results.csv");
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == kHeader);
    int box1 = 0, box2 = 0;
    for (const std::string& line : lines) {
        if (line.find(",box(1),") != std::string::npos) ++box1;
        if (line.find(",box(2),") != std::string::npos) ++box2;
    }
    CHECK(box1 == 3);
    CHECK(box2 == 3);
    std::string body = slurp("cli_out_scan/results.csv");
    CHECK(body.find(",var_dh,") != std::string::npos);
    CHECK(body.find(",surround,") != std::string::npos);
    CHECK(body.find(",n_nonzero,") != std::string::npos);

    CHECK(run("variance-scan --config cli_scan.json --out cli_out_scan_b --threads 1") == 0);
    CHECK(slurp("cli_out_scan/results.csv") == slurp("cli_out_scan_b/results.csv"));
}

TEST_CASE("cleanup of test artifacts") {
    for (const char* name :
         {"cli_empty_grid.json", "cli_no_sizes.json", "cli_prism_sizes.json", "cli_bad_graph.json",
          "cli_torus.json", "cli_sample.json", "cli_scan.json"})
        std::filesystem::remove(name);
    for (const char* dir :
         {"cli_out_eg", "cli_out_ns", "cli_out_ps", "cli_out_bg", "cli_out_verify",
          "cli_out_torus", "cli_out_mut", "cli_out_mut2", "cli_out_s1", "cli_out_s2", "cli_out_s3",
          "cli_out_s4", "cli_out_scan", "cli_out_scan_b"})
        std::filesystem::remove_all(dir);
    CHECK(true);
}

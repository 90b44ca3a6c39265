#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "qvi/commands.hpp"
#include "qvi/field_io.hpp"
#include "qvi/report.hpp"

using namespace qvi;
namespace fs = std::filesystem;

namespace {

const std::string kBench = QVI_BENCH_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qvi_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

CommandOptions quiet(const fs::path& out, std::ostream& log) {
    CommandOptions o;
    o.out_dir = out.string();
    o.log = &log;
    return o;
}

int run_exe(const std::string& args) {
    const std::string cmd = std::string(QVI_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json load_json(const fs::path& p) { return Json::parse(read_file(p.string())); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve on zero data writes an all-zero solution") {
    std::ostringstream log;
    const fs::path out = scratch("trivial");
    CHECK(cmd_solve(kBench + "/trivial.toml", quiet(out, log)) == kExitOk);
    for (const char* f : {"u.csv", "mu.csv", "contact.csv", "trace.json", "manifest.json"}) CHECK(fs::exists(out / f));
    const GridField u = load_field((out / "u.csv").string());
    CHECK(sup_norm(u) == 0.0);
    const Json trace = load_json(out / "trace.json");
    CHECK(trace["status"] == "converged");
    CHECK(trace["contact_nodes"] == 0);
    CHECK(trace["hashes"]["u.csv"] == sha256_hex(read_file((out / "u.csv").string())));
}

TEST_CASE("invalid assumptions exit with an input error") {
    std::ostringstream log;
    CHECK(cmd_solve(kBench + "/invalid_c0.toml", quiet(scratch("invalid"), log)) == kExitInput);
    CHECK(log.str().find("c_lower_bound") != std::string::npos);
    CHECK(cmd_solve("/nonexistent.toml", quiet(scratch("missing_cfg"), log)) == kExitInput);
}

TEST_CASE("verify passes on a fresh run and catches tampering") {
    std::ostringstream log;
    const fs::path out = scratch("verify");
    REQUIRE(cmd_solve(kBench + "/bench_1d.toml", quiet(out, log)) == kExitOk);
    CHECK(cmd_verify(out.string(), quiet(out, log)) == kExitOk);
    const Json v = load_json(out / "verify.json");
    CHECK(v["passed"] == true);

    // nudge one interior value of u
    std::istringstream in(read_file((out / "u.csv").string()));
    std::ostringstream tampered;
    std::string line;
    int row = -1;
    while (std::getline(in, line)) {
        if (row == 40) {
            const auto comma = line.rfind(',');
            line = line.substr(0, comma + 1) + format_real(std::stod(line.substr(comma + 1)) - 1e-3);
        }
        tampered << line << '\n';
        ++row;
    }
    write_file((out / "u.csv").string(), tampered.str());
    CHECK(cmd_verify(out.string(), quiet(out, log)) == kExitCheckFailed);
    CHECK(load_json(out / "verify.json")["passed"] == false);

    CHECK(cmd_verify(scratch("nothing_here").string(), quiet(scratch("nothing_out"), log)) == kExitInput);
}

TEST_CASE("analyze records the three-dimensional refusal") {
    std::ostringstream log;
    const fs::path out = scratch("analyze3d");
    REQUIRE(cmd_solve(kBench + "/small_3d.toml", quiet(out, log)) == kExitOk);
    CHECK(cmd_analyze(out.string(), quiet(out, log)) == kExitOk);
    const Json fb = load_json(out / "freeboundary.json");
    CHECK(fb["labeling_refused"] == true);
    CHECK(fs::exists(out / "regularity.json"));
}

TEST_CASE("oracle cross-checks and size guard") {
    std::ostringstream log;
    const fs::path out = scratch("oracle");
    CHECK(cmd_oracle(kBench + "/trivial.toml", quiet(out, log)) == kExitOk);
    CHECK(load_json(out / "oracle.json")["passed"] == true);

    const fs::path big = scratch("big");
    fs::create_directories(big);
    write_file((big / "big.toml").string(),
               "[domain]\nbounds = [[0, 1], [0, 1]]\ncounts = [400, 300]\n[operator]\nc = 1\nc0 = 1\n[data]\nf = 1\n");
    CHECK(cmd_oracle((big / "big.toml").string(), quiet(big, log)) == kExitInput);
    CHECK(log.str().find("coarser") != std::string::npos);
}

TEST_CASE("repeated runs produce byte-identical artifacts") {
    std::ostringstream log;
    std::vector<std::map<std::string, std::string>> hashes;
    for (const char* name : {"det_a", "det_b"}) {
        const fs::path out = scratch(name);
        REQUIRE(cmd_solve(kBench + "/bench_1d.toml", quiet(out, log)) == kExitOk);
        REQUIRE(cmd_verify(out.string(), quiet(out, log)) == kExitOk);
        REQUIRE(cmd_analyze(out.string(), quiet(out, log)) == kExitOk);
        std::map<std::string, std::string> h;
        for (const auto& e : fs::directory_iterator(out)) {
            const std::string f = e.path().filename().string();
            if (f != "manifest.json") h[f] = sha256_hex(read_file(e.path().string()));
        }
        hashes.push_back(h);
    }
    CHECK(hashes[0].size() >= 8);
    CHECK(hashes[0] == hashes[1]);
}

TEST_CASE("executable exit codes") {
    const fs::path out = scratch("exe");
    CHECK(run_exe("solve " + kBench + "/trivial.toml --out " + out.string()) == 0);
    CHECK(run_exe("verify " + out.string()) == 0);
    CHECK(run_exe("analyze " + out.string()) == 0);
    CHECK(run_exe("solve " + kBench + "/invalid_c0.toml --out " + out.string() + "_bad") == 1);
    CHECK(run_exe("oracle " + kBench + "/trivial.toml --out " + out.string() + " --seed 5") == 0);
    CHECK(load_json(out / "oracle.json")["seed"] == 5);
    CHECK(run_exe("verify " + scratch("exe_missing").string()) == 1);
    CHECK(run_exe("frobnicate x") != 0);
    CHECK(run_exe("--version") == 0);
}

}

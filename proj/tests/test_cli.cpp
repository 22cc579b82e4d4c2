#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {
int run(const std::string& args) {
    const std::string cmd = std::string(SPIKELAB_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("spikelab_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}
}  // namespace

TEST_CASE("constants subcommand") {
    const auto d = scratch("constants");
    CHECK(run("constants --json --out " + (d / "c.json").string()) == 0);
    const std::string s = slurp(d / "c.json");
    for (const char* key : {"\"c4\"", "\"omega3\"", "\"alpha4\"", "\"A\"", "\"I_3\"", "\"I_4\"", "\"version\""})
        CHECK(s.find(key) != std::string::npos);
}

TEST_CASE("usage and config errors exit 1") {
    const auto d = scratch("usage");
    CHECK(run("frobnicate") == 1);
    CHECK(run("constants --nope") == 1);
    std::ofstream(d / "bad.cfg") << "kind=ball\nradius=1\ncolour=red\n";
    CHECK(run("robin --domain " + (d / "bad.cfg").string()) == 1);
    CHECK(run("robin --domain " + (d / "missing.cfg").string()) == 1);
    std::ofstream(d / "ball.cfg") << "kind=ball\n";
    std::ofstream(d / "ens.cfg") << "m=1\nlambdas=0.1\nbeta=-1\nboxes=40,52,-0.5,-0.5,-0.5,-0.5,0.5,0.5,0.5,0.5\n";
    CHECK(run("reduced-energy --domain " + (d / "ball.cfg").string() + " --ensemble " + (d / "ens.cfg").string()) == 1);
}

TEST_CASE("failed runs leave no artifact behind") {
    const auto d = scratch("atomic");
    CHECK(run("radial-study --lambdas 20,18,16 --out " + (d / "s.csv").string()) == 2);
    CHECK_FALSE(fs::exists(d / "s.csv"));
    for (const auto& e : fs::directory_iterator(d)) CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}

TEST_CASE("project-check and reduced-energy") {
    const auto d = scratch("runs");
    std::ofstream(d / "ball.cfg") << "kind=ball\nradius=1\n";
    CHECK(run("project-check --domain " + (d / "ball.cfg").string() + " --deltas 1e-1,1e-2,1e-3 --out " +
              (d / "p.csv").string()) == 0);
    CHECK(slurp(d / "p.csv").find("delta,defect") != std::string::npos);
    std::ofstream(d / "ens.cfg") << "m=1\nlambdas=0.1\nmus=1\nbeta_schedule=exp:0.25\neta=0.5\n"
                                    "boxes=40,52,-0.5,-0.5,-0.5,-0.5,0.5,0.5,0.5,0.5\n";
    CHECK(run("reduced-energy --domain " + (d / "ball.cfg").string() + " --ensemble " + (d / "ens.cfg").string() +
              " --mode degree --out " + (d / "r.json").string()) == 0);
    CHECK(slurp(d / "r.json").find("\"admissible\": true") != std::string::npos);
}

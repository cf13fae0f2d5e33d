#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "paneitz/commands.hpp"

using namespace paneitz;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("paneitz_test_cli_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

RunConfig small(const fs::path& out)
{
    RunConfig c;
    c.gridsize = 1000;
    c.out = out.string();
    return c;
}

int run(const RunConfig& c, const std::string& cmd, const CommandOptions& o = {})
{
    std::ostringstream log;
    return run_command(c, cmd, o, log);
}

int shell(const std::string& cmd)
{
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("spectrum writes eigenvalues and a manifest")
{
    const auto out = scratch("spectrum");
    REQUIRE(run(small(out), "spectrum") == Exit::ok);
    std::istringstream csv(slurp(out / "spectrum.csv"));
    std::string header, row0, row1;
    std::getline(csv, header);
    std::getline(csv, row0);
    std::getline(csv, row1);
    CHECK(header == "i,lambda_i,lambda_extrapolated,zero_count");
    CHECK(row1.rfind("1,", 0) == 0);
    const double l1 = std::stod(row1.substr(2));
    CHECK(l1 == doctest::Approx(-3.0).epsilon(1e-4));

    const auto m = read_json(out / "manifest.json");
    CHECK(m["command"] == "spectrum");
    CHECK(m["exit_code"] == 0);
    CHECK(m["status"] == "ok");
    CHECK(m.contains("versions"));
    CHECK_FALSE(m.contains("timings"));
}

TEST_CASE("verify-appendix for S3xS3")
{
    const auto out = scratch("appendix");
    CommandOptions o;
    o.n = 3;
    o.m = 3;
    o.lambda0 = 1.0;
    REQUIRE(run(small(out), "verify-appendix", o) == Exit::ok);
    const auto rows = read_json(out / "appendix.json");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["h0"].get<double>() == doctest::Approx(0.16).epsilon(1e-14));
    CHECK(rows[0]["all_positive"] == true);
}

TEST_CASE("diagram has the trivial line and one polyline per branch")
{
    const auto out = scratch("diagram");
    auto c = small(out);
    c.s_max = 60.0;
    REQUIRE(run(c, "diagram") == Exit::ok);
    const auto svg = slurp(out / "diagram.svg");
    CHECK(svg.find("id=\"trivial\"") != std::string::npos);
    int lines = 0;
    for (std::size_t k = svg.find("class=\"branch\""); k != std::string::npos;
         k = svg.find("class=\"branch\"", k + 1))
        ++lines;
    CHECK(lines == 3);
    int dots = 0;
    for (std::size_t k = svg.find("class=\"bifurcation\""); k != std::string::npos;
         k = svg.find("class=\"bifurcation\"", k + 1))
        ++dots;
    CHECK(dots == 3);
}

TEST_CASE("reruns are byte-identical")
{
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    CommandOptions o;
    o.cells = 8;
    o.s = 12.0;
    REQUIRE(run(small(a), "scan", o) == Exit::ok);
    REQUIRE(run(small(b), "scan", o) == Exit::ok);
    for (const char* f : {"scan.csv", "scan_cells.csv"}) CHECK(slurp(a / f) == slurp(b / f));
    auto ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
    ma["config"].erase("out");
    mb["config"].erase("out");
    CHECK(ma == mb);
}

TEST_CASE("a failing stage is recorded")
{
    const auto out = scratch("failure");
    auto c = small(out);
    c.coefficients = {{"source", "polynomial"}, {"alpha", {1.0}}, {"beta", {0.0, 0.0, 0.1}}};
    CHECK(run(c, "bifurcation-points") == Exit::failed);
    const auto m = read_json(out / "manifest.json");
    CHECK(m["exit_code"] == 1);
    CHECK(m["status"] != "ok");
    CHECK(m.contains("failed_stage"));
    CHECK(m["failed_stage"].get<std::string>() != "setup");
}

TEST_CASE("usage errors exit with 2")
{
    const auto out = scratch("usage");
    CHECK(run(small(out), "no-such-command") == Exit::usage);

    auto bad = small(out);
    bad.gridsize = -5;
    CHECK(run(bad, "spectrum") == Exit::usage);

    std::ostringstream log;
    CHECK(report_config_error(out.string(), "spectrum", "broken", log) == Exit::usage);
    const auto m = read_json(out / "manifest.json");
    CHECK(m["failed_stage"] == "config");
}

TEST_CASE("command line")
{
    const std::string exe = PANEITZ_CLI;
    const auto root = scratch("binary");
    fs::create_directories(root);
    CHECK(shell(exe + " --version > /dev/null") == 0);
    CHECK(shell(exe + " frobnicate > /dev/null 2>&1") == 2);
    CHECK(shell(exe + " --config /nonexistent.json coeffs > /dev/null 2>&1") == 2);

    const auto bad = root / "bad.json";
    std::ofstream(bad) << R"({"gridsize": "many"})";
    CHECK(shell(exe + " --out " + (root / "bad").string() + " --config " + bad.string() +
                " spectrum > /dev/null 2>&1") == 2);
    CHECK(read_json(root / "bad" / "manifest.json")["failed_stage"] == "config");
    std::ofstream(bad) << R"({"numerics": {"gridsize": "many"}})";
    CHECK(shell(exe + " --out " + (root / "bad").string() + " --config " + bad.string() +
                " spectrum > /dev/null 2>&1") == 2);

    // the environment variable picks the directory, --out wins over it
    const auto env = root / "env", flag = root / "flag";
    CHECK(shell("PANEITZ_OUT=" + env.string() + " " + exe + " coeffs > /dev/null") == 0);
    CHECK(fs::exists(env / "coeffs.json"));
    CHECK(shell("PANEITZ_OUT=" + env.string() + " " + exe + " --out " + flag.string() +
                " verify-appendix --n 3 --m 3 > /dev/null") == 0);
    CHECK(fs::exists(flag / "appendix.json"));
    CHECK_FALSE(fs::exists(env / "appendix.json"));
}

TEST_CASE("shipped configs load")
{
    int count = 0;
    for (const auto& e : fs::directory_iterator(fs::path(PANEITZ_SOURCE_DIR) / "configs")) {
        if (e.path().extension() != ".json") continue;
        INFO(e.path().string());
        CHECK_NOTHROW(RunConfig::load(e.path().string()));
        ++count;
    }
    CHECK(count >= 4);
}

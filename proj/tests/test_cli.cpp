#include "doctest.h"

#include "berslab/cli.hpp"
#include "berslab/types.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using berslab::cli::parse_t_grid;
using nlohmann::json;

namespace {

const std::string configs = std::string(BERSLAB_SOURCE_DIR) + "/configs/";

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args)
{
    args.insert(args.begin(), "berslab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = berslab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string grid_error(const std::string& spec)
{
    try {
        parse_t_grid(spec);
    } catch (const berslab::ValidationError& e) {
        return e.code();
    }
    return "";
}

std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("berslab_cli_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("t grid parsing")
{
    const auto g = parse_t_grid("0.05:1:0.05");
    REQUIRE(g.size() == 20);
    CHECK(g.front() == 0.05);
    CHECK(g.back() == 1.0);
    CHECK(g[6] == 0.05 + 6 * 0.05);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);

    CHECK(parse_t_grid("0.3") == std::vector<double>{0.3});
    CHECK(parse_t_grid("0.1:0.35:0.1").size() == 3);
    CHECK(grid_error("0.5:0.4:0.1") == "empty_grid");
    CHECK(grid_error("0:1:0.5") == "t_range");
    CHECK(grid_error("0.5:1.5:0.5") == "t_range");
    CHECK(grid_error("0.1:1:0") == "t_grid");
    CHECK(grid_error("0.1:1") == "t_grid");
    CHECK(grid_error("a:b:c") == "t_grid");
    CHECK(grid_error("0.1:1:0.1:") == "t_grid");
    CHECK(grid_error("") == "t_grid");
}

TEST_CASE("critical-radius")
{
    auto r = run({"critical-radius", "--polygon", configs + "rectangle.json", "--json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["schema"] == "berslab.critical_radius/1");
    CHECK(j["a"] == 1.25);
    CHECK(j["b"] == 2.0);
    CHECK(j["c"] == -2.0);
    CHECK(std::abs(j["r0"].get<double>() - 0.696663) < 1e-5);

    r = run({"critical-radius", "--polygon", configs + "rectangle.json"});
    CHECK(r.out.find("r0 = 0.696663") != std::string::npos);

    r = run({"critical-radius", "--polygon", configs + "triangle.json", "--json"});
    CHECK(std::abs(json::parse(r.out)["r0"].get<double>() - (std::sqrt(33.0) - 3.0) / 4.0) < 1e-12);
}

TEST_CASE("invalid input exits with 2 and names the invariant")
{
    const auto dir = scratch("invalid");
    const auto bad = (dir / "bad.json").string();
    std::ofstream(bad) << R"({"alphas":[0.5,0.5,1.5,-0.5],"prevertices":[0,1,2,3]})";
    auto r = run({"critical-radius", "--polygon", bad});
    CHECK(r.code == 2);
    CHECK(r.err.find("angle_range") != std::string::npos);

    r = run({"report", "--polygon", (dir / "missing.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("file") != std::string::npos);

    r = run({"ray-probe", "--polygon", configs + "rectangle.json", "--t-grid", "0.5:0.4:0.1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("empty_grid") != std::string::npos);

    CHECK(run({"bnorm", "--polygon", configs + "rectangle.json", "--convention", "hp7"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"theta", "--generators", (dir / "none.json").string()}).code == 2);
}

TEST_CASE("ray-probe: CSV on stdout, files under --out, variants differ")
{
    const auto dir = scratch("probe");
    auto scaled = run({"ray-probe", "--polygon", configs + "rectangle.json", "--t-grid", "0.2:0.6:0.2",
                       "--variant", "scaled", "--out", dir.string(), "--traces"});
    REQUIRE(scaled.code == 0);
    CHECK(scaled.out.rfind("# schema=berslab.ray_probe/1\n", 0) == 0);
    CHECK(std::filesystem::exists(dir / "ray_probe.csv"));
    std::ifstream js(dir / "ray_probe.json");
    const auto j = json::parse(js);
    CHECK(j["schema"] == "berslab.ray_probe/1");
    CHECK(j["rows"].size() == 3);
    for (const auto& row : j["rows"]) CHECK(row["simple"] == true);
    CHECK(std::distance(std::filesystem::directory_iterator(dir / "traces"), std::filesystem::directory_iterator{}) == 3);

    auto homotopy = run({"ray-probe", "--polygon", configs + "rectangle.json", "--t-grid", "0.2:0.6:0.2", "--variant", "homotopy"});
    REQUIRE(homotopy.code == 0);
    CHECK(homotopy.out != scaled.out);
}

TEST_CASE("bnorm conventions")
{
    auto r = run({"bnorm", "--polygon", configs + "rectangle.json", "--variant", "scaled", "--t", "0.5"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["schema"] == "berslab.bnorm/1");
    CHECK(j["convention"] == "hp1");
    CHECK(j["argmax"].size() == 2);
    CHECK(j.contains("stabilized"));
    const double hp1 = j["value"];

    r = run({"bnorm", "--polygon", configs + "rectangle.json", "--variant", "scaled", "--t", "0.5", "--convention", "hp4", "disk"});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    REQUIRE(j["norms"].size() == 2);
    CHECK(j["norms"][0]["value"].get<double>() == doctest::Approx(4.0 * hp1).epsilon(1e-12));
    CHECK(j["norms"][1]["value"].get<double>() == doctest::Approx(4.0 * hp1).epsilon(1e-5));
}

TEST_CASE("beltrami, grunsky and theta outputs carry schemas")
{
    const auto dir = scratch("outputs");
    auto r = run({"beltrami", "--polygon", configs + "rectangle.json", "--out", dir.string(), "--nx", "4", "--ny", "3"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["schema"] == "berslab.beltrami/1");
    CHECK(j["field_norm"].get<double>() == doctest::Approx(0.5 * j["norm_hp1"].get<double>()).epsilon(1e-5));
    std::ifstream grid(dir / "beltrami_grid.csv");
    std::string first;
    std::getline(grid, first);
    CHECK(first == "# schema=berslab.beltrami_grid/1");

    r = run({"grunsky", "--polygon", configs + "rectangle.json", "--N", "8", "--M", "128", "--out", dir.string()});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    CHECK(j["schema"] == "berslab.grunsky/1");
    CHECK(j["truncated_norms"].size() == 4);
    CHECK(std::filesystem::exists(dir / "grunsky_matrix.csv"));
    CHECK(run({"grunsky", "--polygon", configs + "rectangle.json", "--N", "8", "--M", "32"}).code == 2);

    r = run({"theta", "--generators", configs + "schottky.json", "--L", "3", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# schema=berslab.theta_residuals/1\nL,elements,residual,tail_estimate\n", 0) == 0);
    std::ifstream th(dir / "theta.json");
    CHECK(json::parse(th)["schema"] == "berslab.theta/1");
}

TEST_CASE("report: identities and byte-identical reruns")
{
    const std::vector<std::string> args{"report", "--polygon", configs + "rectangle.json", "--seed", "42", "--N", "16", "--L", "4"};
    const auto first = run(args);
    REQUIRE(first.code == 0);
    CHECK(run(args).out == first.out);
    const auto j = json::parse(first.out);
    CHECK(j["schema"] == "berslab.report/1");
    const double hp1 = j["norm_hp1"];
    CHECK(j["norm_hp4"].get<double>() == doctest::Approx(4.0 * hp1).epsilon(1e-12));
    CHECK(j["beltrami_norm"].get<double>() == doctest::Approx(0.5 * hp1).epsilon(1e-5));
    CHECK(j["t"].get<double>() == doctest::Approx(0.69666295470957).epsilon(1e-12));
    CHECK(j["grunsky"]["schema"] == "berslab.grunsky/1");
    CHECK(j["theta"]["schema"] == "berslab.theta/1");

    auto other_seed = args;
    other_seed[4] = "43";
    CHECK(run(other_seed).out != first.out);
}

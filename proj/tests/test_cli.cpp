#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "app.hpp"
#include "ltlab/grid_io.hpp"

using namespace ltlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "ltlab");
    std::ostringstream out, err;
    Run r;
    r.code = app::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ltlab_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json load(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path uniform_fixture(const fs::path& dir) {
    const auto box = BoxSpec::cube(1, 0.0, 1.0, 64);
    const auto rho = GridFunction::sample(box, [](const Point&) { return cplx(2.6, 0.0); });
    const fs::path p = dir / "rho.bin";
    write_grid(p, rho);
    return p;
}

}  // namespace

TEST_CASE("gn reproduces the 1D soliton constant") {
    const auto dir = scratch("gn");
    const auto r = run({"gn", "--s", "1", "--d", "1", "--points", "2048", "--box", "40", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    const auto j = load(dir / "gn.report.json");
    CHECK(j.at("command") == "gn");
    CHECK(j.at("result").at("value").get<double>() == doctest::Approx(M_PI * M_PI / 4.0).epsilon(0.01));
    CHECK(j.at("config").at("points") == 2048);
}

TEST_CASE("constants report lists the Hardy constant") {
    const auto dir = scratch("constants");
    REQUIRE(run({"constants", "--out-dir", dir.string()}).code == 0);
    const auto j = load(dir / "constants.report.json");
    bool found = false;
    for (const auto& k : j.at("result").at("constants"))
        if (k.at("name") == "hardy_constant(s=1,d=3)") {
            found = true;
            CHECK(k.at("value").get<double>() == doctest::Approx(0.25).epsilon(1e-12));
        }
    CHECK(found);
}

TEST_CASE("cover on the uniform mass 2.6 fixture") {
    const auto dir = scratch("cover");
    const auto input = uniform_fixture(dir);
    const auto r = run({"cover", "--input", input.string(), "--eps-inv", "2", "--delta", "0.3", "--csv", "--out-dir",
                        dir.string()});
    REQUIRE(r.code == 0);
    const auto res = load(dir / "cover.report.json").at("result");
    REQUIRE(res.at("level_count") == 4);
    const auto& levels = res.at("levels");
    for (int n = 0; n < 3; ++n) {
        CHECK(levels[n].at("g0").empty());
        CHECK(levels[n].at("light").empty());
        REQUIRE(levels[n].at("heavy").size() == 1);
        for (const auto& m : levels[n].at("heavy")[0].at("cube_masses"))
            CHECK(m.get<double>() == doctest::Approx(2.6 / (2 << n)).epsilon(1e-12));
    }
    CHECK(levels[3].at("g0").size() == 16);
    for (const auto& q : levels[3].at("g0")) CHECK(q.at("mass").get<double>() == doctest::Approx(0.1625).epsilon(1e-12));
    CHECK(res.at("verify").at("all_pass") == true);
    CHECK(fs::exists(dir / "cover.csv"));
}

TEST_CASE("exit codes and error lines") {
    const auto dir = scratch("errors");
    auto r = run({"gn", "--s", "-1", "--out-dir", dir.string()});
    CHECK(r.code == app::kConfig);
    CHECK(r.err.rfind("error code=2 kind=config message=", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    CHECK(run({"nonsense"}).code == app::kConfig);
    CHECK(run({"gn", "--no-such-flag", "1"}).code == app::kConfig);

    r = run({"cover", "--input", (dir / "missing.bin").string(), "--out-dir", dir.string()});
    CHECK(r.code == app::kIo);
    CHECK(r.err.rfind("error code=3 kind=io message=", 0) == 0);

    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK(run({"gn", "--config", (dir / "bad.json").string()}).code == app::kIo);

    const auto box = BoxSpec::cube(1, 0.0, 1.0, 16);
    std::vector<cplx> vals(256, cplx(1.0 / 16.0 * 16.0, 0.0));
    vals[5] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    write_state_raw(dir / "nan.bin", box, 2, vals);
    r = run({"quotient", "--input", (dir / "nan.bin").string(), "--out-dir", dir.string()});
    CHECK(r.code == app::kNumeric);
    CHECK(r.err.rfind("error code=4 kind=numeric message=", 0) == 0);
}

TEST_CASE("config precedence: flags over file over defaults") {
    const auto dir = scratch("config");
    const auto input = uniform_fixture(dir);
    std::ofstream(dir / "cfg.json") << json{{"delta", 0.2}, {"name", "fromfile"}}.dump();
    REQUIRE(run({"cover", "--config", (dir / "cfg.json").string(), "--input", input.string(), "--out-dir",
                 dir.string()})
                .code == 0);
    auto cfg = load(dir / "fromfile.report.json").at("config");
    CHECK(cfg.at("delta") == 0.2);
    CHECK(cfg.at("eps_inv") == 2);

    REQUIRE(run({"cover", "--config", (dir / "cfg.json").string(), "--delta", "0.3", "--input", input.string(),
                 "--out-dir", dir.string()})
                .code == 0);
    cfg = load(dir / "fromfile.report.json").at("config");
    CHECK(cfg.at("delta") == 0.3);

    REQUIRE(run({"cover", "--input", input.string(), "--out-dir", dir.string()}).code == 0);
    CHECK(load(dir / "cover.report.json").at("config").at("delta") == 0.1);

    std::ofstream(dir / "unknown.json") << json{{"dleta", 0.2}}.dump();
    CHECK(run({"cover", "--config", (dir / "unknown.json").string(), "--input", input.string()}).code == app::kConfig);
}

TEST_CASE("hardy mode defaults to a ternary refinement") {
    const auto dir = scratch("hardy");
    const auto box = BoxSpec::centered(2, 2.0, 64);
    write_grid(dir / "rho.bin", GridFunction::sample(box, [](const Point& x) {
                   return cplx(20.0 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 0.05), 0.0);
               }));
    REQUIRE(run({"cover", "--d", "2", "--s", "0.75", "--hardy", "--input", (dir / "rho.bin").string(), "--out-dir", dir.string()})
                .code == 0);
    const auto j = load(dir / "cover.report.json");
    CHECK(j.at("config").at("eps_inv") == 3);
    CHECK(j.at("result").at("verify").at("all_pass") == true);
}

TEST_CASE("identical runs give byte-identical reports") {
    const auto dir = scratch("det");
    const std::vector<std::string> gn = {"gn", "--s", "0.75", "--d", "1", "--points", "256", "--box", "20",
                                         "--restarts", "2", "--seed", "5", "--out-dir", dir.string()};
    const std::vector<std::string> quotient = {"quotient", "--s", "1", "--d", "1", "--lambda", "2", "--separation", "6",
                                               "--csv", "--out-dir", dir.string()};
    std::vector<std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
        REQUIRE(run(gn).code == 0);
        REQUIRE(run(quotient).code == 0);
        std::vector<std::string> now = {bytes(dir / "gn.report.json"), bytes(dir / "quotient.report.json"),
                                        bytes(dir / "quotient.csv")};
        if (pass == 0)
            first = now;
        else
            for (std::size_t i = 0; i < now.size(); ++i) CHECK(now[i] == first[i]);
    }
}

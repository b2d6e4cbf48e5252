#include "../tools/cli.hpp"
#include "fixtures.hpp"

#include <json.hpp>

#include <doctest.h>

#include <filesystem>
#include <sstream>

using json = nlohmann::ordered_json;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = relalg::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("check command") {
    auto r = run_cli({"--json", "--quiet", "check", fixture_path("surfaces.alg")});
    CHECK(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["command"] == "check");
    CHECK(j["seed"] == 0);
    CHECK(j["result"]["standard"] == "yes");
    CHECK(j["result"]["fiber"] == json::array({"phi"}));
}

TEST_CASE("derive command") {
    auto r = run_cli({"--json", "--quiet", "derive", fixture_path("surfaces.alg"), "--form", "K"});
    CHECK(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["result"]["result"] == "cos(phi) * theta1 + sin(phi) * theta2");
}

TEST_CASE("tower exit codes and report shape") {
    auto ok = run_cli({"--json", "--quiet", "tower", fixture_path("surfaces.alg"), "--max-depth", "3"});
    CHECK(ok.code == 0);
    json j = json::parse(ok.out);
    CHECK(j["result"]["levels"].size() == 3);
    CHECK(j["result"]["formal_integrability_certificate"] == true);
    for (const auto& lv : j["result"]["levels"]) {
        CHECK(lv["cartan_test"]["involutive"] == "yes");
        CHECK(lv["characters"]["s"] == json::array({1, 0, 0}));
        CHECK(lv["new_vars"].size() == 1);
    }
    auto bad = run_cli({"--json", "--quiet", "tower", fixture_path("nonint.alg"), "--max-depth", "5"});
    CHECK(bad.code == 2);
    json k = json::parse(bad.out);
    CHECK(k["result"]["obstructed_level"] == 2);
    CHECK(k["result"]["levels"][1]["obstructions"][0]["form"] == "2 * theta1 ^ theta2");
}

TEST_CASE("prolong exit code 2 on obstruction") {
    auto r = run_cli({"--quiet", "prolong", fixture_path("nonint.alg"), "--steps", "2"});
    CHECK(r.code == 2);
}

TEST_CASE("characters and cartan-test commands") {
    auto r = run_cli({"--json", "--quiet", "characters", fixture_path("surfaces.alg")});
    CHECK(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["result"]["s"] == json::array({1, 0, 0}));
    auto p = run_cli({"--json", "--quiet", "characters", fixture_path("surfaces.alg"), "--flag", "2, 1, 3"});
    CHECK(p.code == 0);
    json pj = json::parse(p.out);
    CHECK(pj["result"]["s"].size() == 3);

    auto ct = run_cli({"--json", "--quiet", "cartan-test", fixture_path("surfaces.alg")});
    json cj = json::parse(ct.out);
    CHECK(cj["result"]["prolongation_rank"] == 1);
    CHECK(cj["result"]["bound"] == 1);
    CHECK(cj["result"]["involutive"] == "yes");
}

TEST_CASE("cohomology command") {
    auto r = run_cli({"--json", "--quiet", "cohomology", fixture_path("surfaces.alg"), "--m", "0", "--l", "2", "--point", "K=1, phi=1/3"});
    CHECK(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["result"]["dim"] == 0);
    auto bad = run_cli({"cohomology", fixture_path("surfaces.alg"), "--m", "2", "--l", "2", "--point", "K=1, phi=1/3"});
    CHECK(bad.code == 1);
}

TEST_CASE("restrict command") {
    auto ok = run_cli({"--json", "--quiet", "restrict", fixture_path("torsion_tableau.alg"), "--eq", "x=0"});
    CHECK(ok.code == 0);
    auto bad = run_cli({"restrict", fixture_path("surfaces.alg"), "--eq", "K=1"});
    CHECK(bad.code == 1);
}

TEST_CASE("from-pde then prolong") {
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "relalg_cli_test";
    fs::create_directories(tmp);
    std::string emitted = (tmp / "uxy.alg").string();
    auto r = run_cli({"--quiet", "from-pde", fixture_path("uxy.pde"), "--emit", emitted});
    CHECK(r.code == 0);
    auto p = run_cli({"--json", "--quiet", "prolong", emitted});
    CHECK(p.code == 0);
    json j = json::parse(p.out);
    CHECK(j["result"]["levels"][0]["new_vars"] == json::array({"u_yy"}));
    CHECK(j["result"]["levels"][0]["lift"]["D u_y"] == "theta1 + u_yy * theta2");
}

TEST_CASE("pde-compare command") {
    auto r = run_cli({"--json", "--quiet", "pde-compare", fixture_path("uxy.pde"), "--depth", "1"});
    CHECK(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["result"]["match"] == true);
}

TEST_CASE("emit round trip: tower of the emitted level equals the next level") {
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "relalg_emit_test";
    fs::remove_all(tmp);
    auto e = run_cli({"--quiet", "prolong", fixture_path("surfaces.alg"), "--steps", "1", "--emit", tmp.string()});
    CHECK(e.code == 0);
    std::string level1 = (tmp / "surfaces.level1.alg").string();
    REQUIRE(fs::exists(level1));
    auto t1 = run_cli({"--json", "--quiet", "tower", level1, "--max-depth", "1"});
    auto t0 = run_cli({"--json", "--quiet", "tower", fixture_path("surfaces.alg"), "--max-depth", "2"});
    json j1 = json::parse(t1.out);
    json j0 = json::parse(t0.out);
    CHECK(j1["result"]["levels"][0]["lift"] == j0["result"]["levels"][1]["lift"]);
    CHECK(j1["result"]["levels"][0]["new_vars"] == j0["result"]["levels"][1]["new_vars"]);
}

TEST_CASE("byte-identical reports for a fixed seed") {
    std::vector<std::vector<std::string>> commands = {
        {"tower", fixture_path("surfaces.alg"), "--max-depth", "3", "--json", "--quiet",
         "--seed", "7"},
        {"cartan-test", fixture_path("surfaces.alg"), "--json", "--quiet", "--seed", "7"},
        {"pde-compare", fixture_path("transport.pde"), "--depth", "2", "--json", "--quiet",
         "--seed", "7"},
    };
    for (const auto& cmd : commands) {
        auto a = run_cli(cmd);
        auto b = run_cli(cmd);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("bad invocations exit 1") {
    CHECK(run_cli({"tower", "/nonexistent.alg", "--max-depth", "2"}).code == 1);
    CHECK(run_cli({"bogus-subcommand"}).code == 1);
    CHECK(run_cli({"derive", fixture_path("surfaces.alg"), "--form", "K +"}).code == 1);
}

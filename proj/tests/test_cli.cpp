#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lfgeo/fixtures.hpp"

using namespace lfgeo;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result cli(const std::string& args) {
    const std::string cmd = std::string(LFGEO_CLI) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("lfgeo_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        std::ofstream(dir / "chsh.json") << io::to_json(chsh_inequality(Scenario{2, 2, 2, 2})).dump();
        std::ofstream(dir / "pr.json") << io::to_json(pr_box(Scenario{2, 2, 2, 2})).dump();
        std::ofstream(dir / "bad.json") << "{\"x\": ";
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const char* name) const { return (dir / name).string(); }
    fs::path dir;
};

}  // namespace

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(cli("principles show").code, 0);
    EXPECT_EQ(cli("polytope facets --bogus").code, 2);
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("principles check --position qcm --falsified Kochen").code, 1);
    EXPECT_EQ(cli("polytope member --kind lhv --behavior " + path("bad.json")).code, 1);
    EXPECT_EQ(cli("polytope member --kind lhv --behavior " + path("missing.json")).code, 1);
    EXPECT_EQ(cli("polytope facets --kind lhv --scenario 2,2").code, 1);
}

TEST_F(Cli, LhvFacets2x2) {
    const auto r = cli("polytope facets --kind lhv --scenario 2,2,2,2");
    ASSERT_EQ(r.code, 0);
    const auto j = io::Json::parse(r.out);
    EXPECT_EQ(j["count"], 24);
    EXPECT_EQ(j, fixtures::load("lhv_facets_2x2.json"));
}

TEST_F(Cli, PrBoxMembership) {
    const auto r = cli("polytope member --kind ns --behavior " + path("pr.json"));
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(io::Json::parse(r.out)["inside"].get<bool>());
    const auto l = cli("polytope member --kind lhv --behavior " + path("pr.json"));
    ASSERT_EQ(l.code, 0);
    EXPECT_FALSE(io::Json::parse(l.out)["inside"].get<bool>());
}

TEST_F(Cli, PrinciplesCheck) {
    const auto r = cli("principles check --position qcm --falsified LF");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(io::Json::parse(r.out).dump(), R"({"ok":false,"violated":[["LF",["AOE","Locality","NoSuperdeterminism","SpaceTime"]],)"
                                             R"(["LF",["AOE","LocalAction","SpaceTime"]]]})");
    const auto rep = cli("principles repair --position qcm --falsified LF");
    ASSERT_EQ(rep.code, 0);
    io::Json retracts = io::Json::array();
    for (const auto& e : io::Json::parse(rep.out)) retracts.push_back(e["retract"]);
    EXPECT_EQ(retracts, fixtures::load("minimal_repairs.json")["qcm_lf"]);
}

TEST_F(Cli, OptimizeReachesTsirelson) {
    const auto r = cli("quantum optimize --ineq " + path("chsh.json") + " --steps 50 --seed 7");
    ASSERT_EQ(r.code, 0);
    EXPECT_GE(io::Json::parse(r.out)["value"].get<double>(), 2.827);
}

TEST_F(Cli, OutputsAreByteIdenticalAndManifested) {
    const std::string args = "quantum optimize --ineq " + path("chsh.json") + " --steps 20 --seed 3 --out ";
    ASSERT_EQ(cli(args + path("a.json")).code, 0);
    ASSERT_EQ(cli(args + path("b.json")).code, 0);
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
    ASSERT_TRUE(fs::exists(dir / "a.json.manifest.json"));
    const auto m = io::Json::parse(slurp(dir / "a.json.manifest.json"));
    EXPECT_EQ(m["seed"], 3);
    EXPECT_EQ(m["output"]["path"], path("a.json"));
    EXPECT_EQ(m["output"]["sha256"].get<std::string>().size(), 64u);
    ASSERT_EQ(m["inputs"].size(), 1u);
    EXPECT_EQ(m["inputs"][0]["path"], path("chsh.json"));
    EXPECT_TRUE(m.contains("tool_version"));
    EXPECT_TRUE(m["command_line"].is_array());
    EXPECT_GE(m["wall_time_seconds"].get<double>(), 0.0);
    // Same content, same digest.
    const auto m2 = io::Json::parse(slurp(dir / "b.json.manifest.json"));
    EXPECT_EQ(m["output"]["sha256"], m2["output"]["sha256"]);
}

TEST_F(Cli, ScanBellCsv) {
    const auto r = cli("causal scan-bell --behavior " + path("pr.json") + " --format csv");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 193);
}

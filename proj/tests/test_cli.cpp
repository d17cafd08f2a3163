#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hsmax/cli.hpp"
#include "hsmax/io.hpp"
#include "support/cli_support.hpp"

using namespace hsmax;
namespace fs = std::filesystem;
using testsupport::read_file;
using testsupport::run;
using testsupport::scratch_dir;
using testsupport::strip_timestamp;

namespace {

const std::string data = HSMAX_TEST_DATA;

} // namespace

TEST(Cli, ConstantFixtureGivesOnes) {
    const auto out = scratch_dir("cli_constant");
    ASSERT_EQ(run({"maximal", "--input", data + "/constant_3.csv", "--out", out}), 0);
    std::ifstream is(out / "maximal.csv");
    const auto f = io::read_field_csv(is, std::nullopt);
    EXPECT_TRUE((f.values() == 1.0).all());
}

TEST(Cli, PointMassMatchesGolden) {
    const auto out = scratch_dir("cli_golden");
    ASSERT_EQ(run({"maximal", "--input", data + "/point_mass_3.csv", "--out", out}), 0);
    EXPECT_EQ(read_file(out / "maximal.csv"), read_file(data + "/point_mass_3_maximal.csv"));
    const auto diag = nlohmann::json::parse(read_file(out / "diagnostics.json"));
    EXPECT_EQ(diag["report"]["max_value"], 1.0);
    EXPECT_EQ(diag["report"]["argmax_point"], (std::vector<Coord>{1, 1, 1}));
}

TEST(Cli, BinaryOutputRoundTrips) {
    const auto out = scratch_dir("cli_binary");
    ASSERT_EQ(run({"maximal", "--grid", "1,4,1", "--generator", "dense", "--weight", "power:1,1", "--format", "bin",
                   "--out", out}),
              0);
    std::ifstream is(out / "maximal.bin", std::ios::binary);
    const auto f = io::read_field_binary(is);
    EXPECT_EQ(f.grid(), GridSpec::cube(1, 4));
    EXPECT_TRUE((f.values() > 0.0).all());
}

TEST(Cli, UsageErrors) {
    const auto out = scratch_dir("cli_usage");
    EXPECT_EQ(run({"maximal", "--out", out}), 2);
    EXPECT_EQ(run({"maximal", "--input", data + "/does_not_exist.csv", "--out", out}), 2);
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"eta", "--grid", "1,x,1", "--out", out}), 2);
    EXPECT_EQ(run({"eta", "--weight", "power:-1,0", "--out", out}), 2);
    EXPECT_EQ(run({"eta", "--format", "bin", "--out", out}), 2);
    EXPECT_EQ(run({"weaktype", "--p", "1", "--out", out}), 2);
    EXPECT_EQ(run({"maximal", "--help"}), 0);

    const auto bad = out / "bad.json";
    std::ofstream(bad) << R"({"n": 1, "colour": "blue"})";
    EXPECT_EQ(run({"eta", "--config", bad.string(), "--out", out}), 2);
    std::ofstream(bad) << "{not json";
    EXPECT_EQ(run({"eta", "--config", bad.string(), "--out", out}), 2);
}

TEST(Cli, UnwritableOutputIsIoError) {
    const auto out = scratch_dir("cli_io");
    const auto blocker = out / "file";
    std::ofstream(blocker) << "x";
    EXPECT_EQ(run({"eta", "--grid", "1,2,1", "--out", (blocker / "sub").string()}), 1);
}

TEST(Cli, CoverSingleRectangle) {
    const auto out = scratch_dir("cli_cover");
    ASSERT_EQ(run({"cover", "--grid", "1,6,1", "--rects", data + "/single_rect.csv", "--out", out}), 0);
    const auto doc = nlohmann::json::parse(read_file(out / "covering_report.json"));
    EXPECT_EQ(doc["report"][0]["comparability_ratio"], 1.0);
    EXPECT_EQ(doc["report"][0]["indicator_ratio"], 1.0);
    EXPECT_EQ(read_file(out / "selection.csv"), "index,chosen,witness_M,overlap_fraction\n0,1,0,0\n");
}

TEST(Cli, EtaConstantWeight) {
    const auto out = scratch_dir("cli_eta");
    ASSERT_EQ(run({"eta", "--grid", "1,2,1", "--weight", "constant", "--out", out}), 0);
    const auto doc = nlohmann::json::parse(read_file(out / "comparability.json"));
    EXPECT_EQ(doc["report"]["global_eta"], 5.0 / 8.0);
    EXPECT_EQ(doc["report"]["descriptor"], "constant");
    EXPECT_TRUE(fs::exists(out / "comparability.csv"));
}

TEST(Cli, WeaktypeRerunIsIdentical) {
    const auto a = scratch_dir("cli_weak_a"), b = scratch_dir("cli_weak_b");
    const std::vector<std::string> args{"weaktype", "--grid", "1,5,1", "--weight", "power:1,1", "--p", "1.5,2",
                                        "--seed", "21", "--trials", "2", "--generator", "sparse,indicator"};
    auto with_out = [&](const fs::path& dir) {
        auto v = args;
        v.push_back("--out");
        v.push_back(dir.string());
        return v;
    };
    ASSERT_EQ(run(with_out(a)), 0);
    ASSERT_EQ(run(with_out(b)), 0);
    EXPECT_EQ(strip_timestamp(read_file(a / "bound_report.json")), strip_timestamp(read_file(b / "bound_report.json")));
    EXPECT_EQ(read_file(a / "bound_report.csv"), read_file(b / "bound_report.csv"));
}

TEST(Cli, ConfigEchoRoundTrip) {
    cli::RunConfig c;
    c.command = "cover";
    c.extents = {{0, 3}, {1, 4}, {-2, 2}};
    c.p = {1.5, 3.0};
    c.seed = 12345678901234ull;
    c.generators = {"dense_uniform"};
    c.theta = 0.3;
    EXPECT_EQ(cli::config_from_json(cli::to_json(c)), c);
    EXPECT_EQ(cli::config_from_json(nlohmann::json::parse(cli::to_json(c).dump())), c);

    cli::RunConfig g;
    cli::apply_grid_flag(g, "2,-1:3,4");
    EXPECT_EQ(g.n, 2);
    EXPECT_EQ(g.mu, 4);
    EXPECT_EQ(g.extents, std::vector<Interval>(5, {-1, 3}));
    EXPECT_THROW(cli::apply_grid_flag(g, "1,8"), ConfigError);
}

TEST(Cli, EveryCommandReproducesFromEcho) {
    for (const auto& cmd : testsupport::determinism_commands(data)) {
        std::string why;
        EXPECT_TRUE(testsupport::reproduces_from_echo(cmd, why)) << cmd.front() << ": " << why;
    }
}

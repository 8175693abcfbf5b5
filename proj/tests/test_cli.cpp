#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "wander/serialize.hpp"

namespace fs = std::filesystem;
using wander::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(testing::TempDir()) / ("wander_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(WANDER_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);)
        ++n;
    return n;
}

} // namespace

TEST(Cli, Simulate) {
    const auto dir = scratch("simulate");
    ASSERT_EQ(run("simulate --condition LT1 --path straight --out " + dir.string()), 0);
    const json m = json::parse(slurp(dir / "metrics.json"));
    EXPECT_EQ(m.at("path"), "straight");
    EXPECT_EQ(m.at("params").at("mass"), 10.0);
    EXPECT_GT(m.at("metrics").at("e_linear").get<double>(), 0.0);
    EXPECT_EQ(lines(dir / "trajectory.csv"), m.at("samples").get<std::size_t>() + 1);
}

TEST(Cli, SimulateRejectsBadInput) {
    const auto dir = scratch("simulate_bad");
    EXPECT_EQ(run("simulate --dt 0 --out " + dir.string()), 2);
    EXPECT_EQ(run("simulate --path spiral --out " + dir.string()), 2);
    EXPECT_EQ(run("simulate --no-such-flag"), 2);
    EXPECT_FALSE(fs::exists(dir / "metrics.json"));
}

TEST(Cli, OptimizeIsReproducible) {
    const auto a = scratch("optimize_a"), b = scratch("optimize_b");
    const std::string args = "optimize --seed 3 --h-max 3 --oracle distance --landscape 6 --out ";
    ASSERT_EQ(run(args + a.string()), 0);
    ASSERT_EQ(run(args + b.string()), 0);
    for (const char* f : {"trace.json", "state.json", "best.json", "surrogate.json", "landscape.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    const json trace = json::parse(slurp(a / "trace.json"));
    EXPECT_EQ(trace.size(), 3u);
    EXPECT_EQ(lines(a / "landscape.csv"), 37u);
    const json best = json::parse(slurp(a / "best.json"));
    EXPECT_EQ(best.at("seed"), "3");
    EXPECT_EQ(best.at("best_cost_history").size(), 3u);
}

TEST(Cli, ConfigFileAndEnvironment) {
    const auto dir = scratch("config");
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"session": {"bounds": {"lower": [50, 40], "upper": [20, 200]}}})";
    EXPECT_EQ(run("--config " + cfg.string() + " optimize --out " + (dir / "o").string()), 2);
    std::ofstream(cfg) << R"({"colour": {}})";
    EXPECT_EQ(run("--config " + cfg.string() + " optimize --out " + (dir / "o").string()), 2);
    std::ofstream(cfg) << R"({"session": {"h_max": 2}, "oracle": {"objective": "distance"}})";
    ASSERT_EQ(run("--config " + cfg.string() + " optimize --landscape 0 --out " + (dir / "o").string()), 0);
    EXPECT_EQ(json::parse(slurp(dir / "o" / "trace.json")).size(), 2u);
    // A flag beats the config file.
    ASSERT_EQ(run("--config " + cfg.string() + " optimize --h-max 1 --landscape 0 --out " + (dir / "p").string()), 0);
    EXPECT_EQ(json::parse(slurp(dir / "p" / "trace.json")).size(), 1u);
    EXPECT_EQ(run("simulate --condition LT2 --out " + (dir / "s").string(), "WANDER_PATH=bad"), 2);
    EXPECT_EQ(run("simulate --condition LT2 --path straight --out " + (dir / "s").string(), "WANDER_PATH=bad"), 0);
}

TEST(Cli, BenchmarkWithPbo) {
    const auto dir = scratch("benchmark");
    ASSERT_EQ(run("optimize --seed 1 --h-max 4 --landscape 0 --out " + (dir / "opt").string()), 0);
    const std::string args = "benchmark --repetitions 1 --pbo " + (dir / "opt" / "best.json").string() + " --out ";
    ASSERT_EQ(run(args + (dir / "a").string()), 0);
    ASSERT_EQ(run(args + (dir / "b").string()), 0);
    EXPECT_EQ(slurp(dir / "a" / "summary.csv"), slurp(dir / "b" / "summary.csv"));
    EXPECT_EQ(slurp(dir / "a" / "runs.csv"), slurp(dir / "b" / "runs.csv"));
    EXPECT_EQ(lines(dir / "a" / "summary.csv"), 4u);
    const json s = json::parse(slurp(dir / "a" / "summary.json"));
    EXPECT_EQ(s.at("summary").size(), 3u);
    EXPECT_EQ(run("benchmark --conditions LT1,LT7 --out " + (dir / "c").string()), 2);
}

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("springopt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    // Runs the CLI with output going to `sub` inside the test directory.
    int run(const std::string& args, const std::string& sub = "out") {
        const std::string cmd = std::string(SPRINGOPT_CLI) + " " + args + " -o " + (dir_ / sub).string() + " > " +
                                (dir_ / "stdout.txt").string() + " 2> " + (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& rel) const {
        std::ifstream in(dir_ / rel, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static int data_rows(const std::string& csv) {
        std::stringstream ss(csv);
        std::string line;
        int rows = 0;
        bool header = false;
        while (std::getline(ss, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!header) {
                header = true;
                continue;
            }
            ++rows;
        }
        return rows;
    }

    static std::string data(const std::string& name) { return (fs::path(SPRINGOPT_DATA_DIR) / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateCubicWritesRequestedRows) {
    ASSERT_EQ(run("generate-cubic --n 257 --no-timings"), 0) << read("stderr.txt");
    const std::string csv = read("out/trajectory.csv");
    EXPECT_EQ(data_rows(csv), 257);
    EXPECT_NE(csv.find("# config_hash: "), std::string::npos);
    const auto j = nlohmann::json::parse(read("out/cubic.json"));
    EXPECT_NEAR(j["period_s"].get<double>(), 0.263932181600281253, 1e-9);
}

TEST_F(Cli, ZeroReleaseAngleIsAnInputError) {
    EXPECT_EQ(run("generate-cubic --q0 0"), 4);
    EXPECT_NE(read("stderr.txt").find("q0"), std::string::npos) << read("stderr.txt");
}

TEST_F(Cli, BadArgumentsAreInputErrors) {
    EXPECT_EQ(run("design --set thetta=0.5"), 4);
    EXPECT_EQ(run("design --theta 3"), 4);
    EXPECT_EQ(run("design -c /nonexistent/file.cfg"), 4);
    EXPECT_EQ(run("design --bogus-flag"), 4);
}

TEST_F(Cli, DesignIsDeterministicAndStamped) {
    const std::string args = "design -c " + data("cubic.cfg") + " --n 101 --no-timings";
    ASSERT_EQ(run(args, "a"), 0) << read("stderr.txt");
    ASSERT_EQ(run(args, "b"), 0) << read("stderr.txt");
    for (const char* f : {"design.json", "trace.csv", "profile.csv"}) {
        EXPECT_EQ(read(std::string("a/") + f), read(std::string("b/") + f)) << f;
    }
    const auto j = nlohmann::json::parse(read("a/design.json"));
    EXPECT_EQ(j["status"], "optimal");
    const std::string hash = j["config_hash"];
    EXPECT_EQ(hash.size(), 16u);
    EXPECT_NE(read("a/trace.csv").find(hash), std::string::npos);
    EXPECT_NE(read("a/profile.csv").find(hash), std::string::npos);
    EXPECT_EQ(data_rows(read("a/trace.csv")), 101);
    EXPECT_FALSE(j.contains("timing"));

    // Timings change only the timing block; the hash stays.
    ASSERT_EQ(run("design -c " + data("cubic.cfg") + " --n 101", "c"), 0);
    auto t = nlohmann::json::parse(read("c/design.json"));
    EXPECT_TRUE(t.contains("timing"));
    t.erase("timing");
    EXPECT_EQ(t, j);
}

TEST_F(Cli, InfeasibleLimitsExitTwo) {
    EXPECT_EQ(run("design -c " + data("running.cfg") + " --delta-max 0.02 --no-timings"), 2) << read("stderr.txt");
    const auto j = nlohmann::json::parse(read("out/design.json"));
    EXPECT_EQ(j["status"], "infeasible");
}

TEST_F(Cli, SweepWritesOneRowPerPoint) {
    ASSERT_EQ(run("sweep -c " + data("cubic.cfg") + " --n 61 --points 5 --svg --no-timings"), 0) << read("stderr.txt");
    EXPECT_EQ(data_rows(read("out/curve.csv")), 5);
    const auto j = nlohmann::json::parse(read("out/sweep.json"));
    ASSERT_EQ(j["points"].size(), 5u);
    EXPECT_TRUE(j["points"][0]["endpoint"].get<bool>());
    EXPECT_TRUE(j["points"][4]["endpoint"].get<bool>());
    EXPECT_FALSE(j["points"][2]["endpoint"].get<bool>());
    const std::string svg = read("out/sweep.svg");
    EXPECT_EQ(svg.rfind("<!-- config_hash: " + j["config_hash"].get<std::string>(), 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST_F(Cli, BaselineReportsMissingLinearSpring) {
    ASSERT_EQ(run("baseline -c " + data("running.cfg") + " --no-timings"), 0) << read("stderr.txt");
    const auto j = nlohmann::json::parse(read("out/baseline.json"));
    EXPECT_TRUE(j["best"].is_null());
    EXPECT_FALSE(j["rigid_within_limits"].get<bool>());
    EXPECT_FALSE(j["linear_feasible"].get<bool>());
}

TEST_F(Cli, ValidateZeroToleranceFailsInAControlledWay) {
    EXPECT_EQ(run("validate --planted 6 --no-timings"), 0) << read("stderr.txt");
    EXPECT_EQ(run("validate --planted 6 --tolerance-scale 0 --no-timings", "zero"), 3);
    const auto j = nlohmann::json::parse(read("zero/validation.json"));
    EXPECT_FALSE(j["passed"].get<bool>());
}

TEST_F(Cli, FileTaskRoundTrip) {
    ASSERT_EQ(run("generate-cubic --n 80 --no-timings", "gen"), 0);
    const std::string cfg = (dir_ / "file.cfg").string();
    std::ofstream(cfg) << "task = file\ntask.files = gen/trajectory.csv\nload = inertial\nload.I_l = 0.125\n";
    ASSERT_EQ(run("design -c " + cfg + " --no-timings"), 0) << read("stderr.txt");
    EXPECT_EQ(data_rows(read("out/trace.csv")), 80);
}

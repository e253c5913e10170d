#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <springopt/error.hpp>

#include "config.hpp"

using namespace springopt;
using namespace springopt::cli;

namespace {

KeyValues parse(const std::string& text) {
    std::stringstream ss(text);
    return parse_config(ss, "test.cfg");
}

}  // namespace

TEST(Fnv1a, ReferenceVectors) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(fnv1a("bar", fnv1a("foo")), fnv1a("foobar"));
}

TEST(ConfigGrammar, CommentsWhitespaceAndValues) {
    const auto kv = parse(
        "# leading comment\n"
        "\n"
        "  task = running   # trailing comment\n"
        "motor.R=0.5\n"
        "output_dir = out#dir\n"
        "\tlimits.delta_max\t=\t0.4\r\n");
    ASSERT_EQ(kv.size(), 4u);
    EXPECT_EQ(kv.at("task"), "running");
    EXPECT_EQ(kv.at("motor.R"), "0.5");
    EXPECT_EQ(kv.at("output_dir"), "out#dir");
    EXPECT_EQ(kv.at("limits.delta_max"), "0.4");
}

TEST(ConfigGrammar, ErrorsCarryTheLineNumber) {
    try {
        parse("task = cubic\nnot an assignment\n");
        FAIL() << "expected an error";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("test.cfg:2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse("task = a\ntask = b\n"), InputError);
    EXPECT_THROW(parse("bad key = 1\n"), InputError);
    EXPECT_THROW(parse("n =\n"), InputError);
    EXPECT_THROW(parse("= 3\n"), InputError);
    EXPECT_THROW(parse_assignment("theta"), InputError);
    EXPECT_EQ(parse_assignment(" theta = 0.5 ").second, "0.5");
}

TEST(ConfigResolve, DefaultsAndPresets) {
    const RunConfig c = resolve({});
    EXPECT_EQ(c.task, TaskKind::cubic);
    EXPECT_EQ(c.resolved_n(), 501);
    EXPECT_EQ(c.resolved_load().mode, LoadMode::inertial_viscous);
    EXPECT_DOUBLE_EQ(c.motor.eta, 1.0);
    EXPECT_FALSE(c.limits().any());

    const RunConfig run = resolve({{"task", "running"}});
    EXPECT_EQ(run.resolved_n(), 330);
    EXPECT_DOUBLE_EQ(run.motor.eta, 0.8);
    EXPECT_EQ(run.resolved_load().mode, LoadMode::direct_torque);
    EXPECT_DOUBLE_EQ(resolve({{"task", "walking"}, {"motor.eta", "0.9"}}).motor.eta, 0.9);
    EXPECT_EQ(resolve({{"task", "walking"}}).resolved_n(), 570);

    const RunConfig lim = resolve({{"limits.torque", "yes"}, {"limits.speed", "off"}, {"limits.delta_max", "0.3"}});
    EXPECT_EQ(lim.limits().tau_max, lim.motor.tau_max);
    EXPECT_FALSE(lim.limits().dq_max.has_value());
    EXPECT_EQ(lim.limits().delta_max, 0.3);
}

TEST(ConfigResolve, RejectsBadInput) {
    EXPECT_THROW(resolve({{"thetta", "0.5"}}), InputError);
    EXPECT_THROW(resolve({{"theta", "abc"}}), InputError);
    EXPECT_THROW(resolve({{"theta", "2"}}), InputError);
    EXPECT_THROW(resolve({{"n", "3"}}), InputError);
    EXPECT_THROW(resolve({{"n", "1.5"}}), InputError);
    EXPECT_THROW(resolve({{"cubic.q0", "0"}}), InputError);
    EXPECT_THROW(resolve({{"load.I_l", "1"}}), InputError);
    EXPECT_THROW(resolve({{"motor", "other"}}), InputError);
    EXPECT_THROW(resolve({{"motor.k_m", "0.5"}}), InputError);
    EXPECT_THROW(resolve({{"limits.delta_max", "-1"}}), InputError);
    EXPECT_THROW(resolve({{"limits.torque", "maybe"}}), InputError);
    EXPECT_THROW(resolve({{"task", "file"}}), InputError);
    EXPECT_THROW(resolve({{"task.files", "a.csv"}}), InputError);
    EXPECT_THROW(resolve({{"sweep.points", "1"}}), InputError);
    EXPECT_THROW(resolve({{"seed", "-4"}}), InputError);
    EXPECT_NO_THROW(resolve({{"motor.k_m", "0.4222892058466721"}}));
}

TEST(ConfigHash, IgnoresPresentationOnlyKeys) {
    const std::string base = resolve({{"task", "cubic"}}).hash();
    EXPECT_EQ(base.size(), 16u);
    EXPECT_EQ(resolve({{"task", "cubic"}, {"output_dir", "elsewhere"}}).hash(), base);
    EXPECT_EQ(resolve({{"task", "cubic"}, {"timings", "false"}}).hash(), base);
    EXPECT_EQ(resolve({{"task", "cubic"}, {"sweep.threads", "3"}}).hash(), base);
    // Same numbers spelled differently.
    EXPECT_EQ(resolve({{"theta", "1"}}).hash(), resolve({{"theta", "1.000"}}).hash());
    EXPECT_NE(resolve({{"theta", "0.5"}}).hash(), base);
    EXPECT_NE(resolve({{"seed", "2"}}).hash(), base);
}

TEST(ConfigHash, IncludesTaskFileBytes) {
    const auto dir = std::filesystem::temp_directory_path() / "springopt_cfg_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "task.csv";
    auto write = [&](const std::string& body) {
        std::ofstream(file) << "time,q_l,tau_ext\n" << body;
    };
    write("0,0,0\n0.25,1,1\n0.5,0,0\n0.75,-1,-1\n");
    const KeyValues kv = {{"task", "file"}, {"task.files", "task.csv"}};
    const RunConfig a = resolve(kv, dir);
    EXPECT_EQ(a.task_files.front(), dir / "task.csv");
    const std::string h1 = a.hash();
    write("0,0,0\n0.25,1,1\n0.5,0,0\n0.75,-1,-2\n");
    EXPECT_NE(resolve(kv, dir).hash(), h1);

    const Task t = build_task(resolve(kv, dir));
    EXPECT_EQ(t.n(), 4);
    const Task r = build_task(resolve({{"task", "file"}, {"task.files", "task.csv"}, {"n", "8"}}, dir));
    EXPECT_EQ(r.n(), 8);
    std::filesystem::remove_all(dir);
}

TEST(ConfigFiles, BundledConfigsResolve) {
    for (const char* name : {"cubic.cfg", "running.cfg", "walking.cfg", "ilm85x26.cfg"}) {
        const auto path = std::filesystem::path(SPRINGOPT_DATA_DIR) / name;
        EXPECT_NO_THROW(resolve(load_config(path), path.parent_path())) << name;
    }
}

#include "fvd/errors.hpp"
#include "fvd/runner.hpp"
#include "fvd/state_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fvd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / "fvd_runner_test" / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST(RunConfig, ParsesModelSymbols) {
    const RunConfig c = RunConfig::from_json(json::parse(R"({
        "rows": 4, "cols": 4, "J": 1, "g": 1, "h0": 0.1, "hq": [-0.2, -1.6],
        "initial_state": {"type": "excited", "k": 2},
        "chi_dmrg": 32, "chi_q": 48, "svd_min": 1e-9, "t_max": 2, "dt": 0.02,
        "sampling": {"times": [1, 2], "n_shots": 100, "seed": 5}
    })"));
    EXPECT_EQ(c.rows, 4);
    EXPECT_EQ(c.hq, (std::vector<double>{-0.2, -1.6}));
    EXPECT_EQ(c.initial_state.kind, InitialKind::Excited);
    EXPECT_EQ(c.initial_state.label(), "excited_2");
    EXPECT_EQ(c.dmrg.chi_dmrg, 32);
    EXPECT_EQ(c.evolution.chi_q, 48);
    EXPECT_DOUBLE_EQ(c.evolution.svd_min, 1e-9);
    ASSERT_TRUE(c.sampling);
    EXPECT_EQ(c.sampling->n_shots, 100);
    const RunConfig again = RunConfig::from_json(c.to_json());
    EXPECT_EQ(again.hash(), c.hash());
}

TEST(RunConfig, ScalarHqAndStringInitialState) {
    const RunConfig c = RunConfig::from_json(json::parse(R"({"hq": -0.5, "initial_state": "fv_ground"})"));
    EXPECT_EQ(c.hq, (std::vector<double>{-0.5}));
    EXPECT_EQ(c.initial_state.kind, InitialKind::FvGround);
}

TEST(RunConfig, Errors) {
    EXPECT_THROW((void)RunConfig::from_json(json::parse(R"({"chi": 3})")), ConfigError);
    EXPECT_THROW((void)RunConfig::from_json(json::parse(R"({"rows": 0})")), ConfigError);
    EXPECT_THROW((void)RunConfig::from_json(json::parse(R"({"hq": []})")), ConfigError);
    EXPECT_THROW((void)RunConfig::from_json(json::parse(R"({"dt": "fast"})")), ConfigError);
    EXPECT_THROW((void)RunConfig::from_json(json::parse(R"({"initial_state": "vacuum"})")), ConfigError);
    EXPECT_THROW((void)RunConfig::from_json(json::parse(R"({"initial_state": {"type": "file", "path": "/nonexistent"}})")),
                 ConfigError);
    EXPECT_THROW((void)RunConfig::from_json(json::parse(R"({"t_max": 1, "sampling": {"times": [2]}})")), ConfigError);
    EXPECT_THROW((void)RunConfig::load("/nonexistent.json"), ConfigError);
}

TEST(RunConfig, HashIgnoresOutputLocation) {
    RunConfig a, b;
    b.output_dir = "elsewhere";
    b.threads = 4;
    EXPECT_EQ(a.hash(), b.hash());
    b.dt = 0.01;
    EXPECT_NE(a.hash(), b.hash());
}

TEST(RunExperiment, ProductStateTrajectory) {
    RunConfig c;
    c.rows = c.cols = 2;
    c.t_max = 1.0;
    c.dt = 0.05;
    c.output_dir = scratch("product").string();
    const json m = run_experiment(c);
    EXPECT_EQ(m["status"], "ok");
    const std::string csv = read_file(fs::path(c.output_dir) / "trajectory.csv");
    std::istringstream lines(csv);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    EXPECT_EQ(header, "time,mz,ztot_var,p_ret,energy,max_bond,discarded_weight");
    EXPECT_EQ(first.rfind("0,-1,0,1,", 0), 0U) << first;
    bool listed = false;
    for (const auto &o : m["outputs"]) listed |= o["path"] == "trajectory.csv";
    EXPECT_TRUE(listed);
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "manifest.json"));
}

TEST(RunExperiment, DeterministicOutputs) {
    RunConfig c;
    c.rows = 2;
    c.cols = 3;
    c.t_max = 0.5;
    c.initial_state.kind = InitialKind::FvGround;
    c.sampling = SamplingSpec{{0.0, 0.5}, 200, 9};
    c.output_dir = scratch("det_a").string();
    const json a = run_experiment(c);
    c.output_dir = scratch("det_b").string();
    const json b = run_experiment(c);
    EXPECT_EQ(a["config_hash"], b["config_hash"]);
    EXPECT_EQ(a["outputs"], b["outputs"]);
    EXPECT_GE(a["outputs"].size(), 10U);
}

TEST(RunExperiment, StageFailureIsRecorded) {
    RunConfig c;
    c.rows = c.cols = 1;
    c.initial_state.kind = InitialKind::Excited;
    c.initial_state.k = 3;
    c.output_dir = scratch("fail").string();
    EXPECT_THROW((void)run_experiment(c), InputDomainError);
    const json m = json::parse(read_file(fs::path(c.output_dir) / "manifest.json"));
    EXPECT_EQ(m["status"], "failed");
    EXPECT_EQ(m["failed_stage"], "prepare");
}

TEST(RunExperiment, ReusesStateFile) {
    RunConfig c;
    c.rows = 2;
    c.cols = 2;
    c.t_max = 0.2;
    c.initial_state.kind = InitialKind::FvGround;
    c.output_dir = scratch("reuse_src").string();
    (void)run_experiment(c);
    RunConfig r = c;
    r.initial_state = {.kind = InitialKind::File, .path = (fs::path(c.output_dir) / "initial_state.mps").string()};
    r.output_dir = scratch("reuse_dst").string();
    (void)run_experiment(r);
    EXPECT_EQ(read_file(fs::path(c.output_dir) / "trajectory.csv"), read_file(fs::path(r.output_dir) / "trajectory.csv"));
}

TEST(RunExperiment, ExistingStateFileOverridesInitialState) {
    RunConfig c;
    c.rows = 2;
    c.cols = 2;
    c.t_max = 0.2;
    c.initial_state.kind = InitialKind::ProductUp;
    c.output_dir = scratch("state_file_src").string();
    (void)run_experiment(c);
    RunConfig r = c;
    r.initial_state.kind = InitialKind::ProductDown;
    r.state_file = (fs::path(c.output_dir) / "initial_state.mps").string();
    r.output_dir = scratch("state_file_dst").string();
    const json m = run_experiment(r);
    EXPECT_EQ(m["initial_state"]["label"], "file");
    EXPECT_EQ(read_file(fs::path(c.output_dir) / "trajectory.csv"), read_file(fs::path(r.output_dir) / "trajectory.csv"));
}

TEST(SweepFpt, SingleRowAndNotReached) {
    RunConfig c;
    c.rows = c.cols = 2;
    c.t_max = 0.2;
    c.output_dir = scratch("sweep_one").string();
    const auto rows = sweep_fpt(c);
    ASSERT_EQ(rows.size(), 1U);
    EXPECT_FALSE(rows[0].result.reached());
    const std::string csv = read_file(fs::path(c.output_dir) / "fpt.csv");
    EXPECT_EQ(csv, "hq,geometry,initial_state,t_fpt,threshold,reached\n"
                   "-0.2,2x2,product_down,not_reached,0.018315638888734179,false\n");
}

TEST(SweepFpt, SortedRowsAndFailures) {
    RunConfig c;
    c.rows = c.cols = 1;
    c.hq = {-1.0, -2.0};
    c.t_max = 3.0;
    c.geometries = {{1, 1}, {2, 2}};
    c.initial_states = {{.kind = InitialKind::ProductDown}, {.kind = InitialKind::Excited, .k = 2}};
    c.threads = 2;
    c.output_dir = scratch("sweep_grid").string();
    const auto rows = sweep_fpt(c);
    ASSERT_EQ(rows.size(), 8U);
    EXPECT_DOUBLE_EQ(rows.front().hq, -2.0);
    EXPECT_DOUBLE_EQ(rows.back().hq, -1.0);
    // excited_2 does not exist on one site.
    EXPECT_TRUE(rows[1].error.has_value());
    EXPECT_EQ(rows[1].geometry, "1x1");
    EXPECT_FALSE(rows[3].error.has_value());
    std::istringstream lines(read_file(fs::path(c.output_dir) / "fpt.csv"));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    EXPECT_EQ(n, 9);
}

TEST(Reproduce, UnknownFigure) {
    EXPECT_THROW((void)reproduce("fig99", 2, scratch("fig99").string()), ConfigError);
}

TEST(Reproduce, Figure2AtTinyScale) {
    const json s = reproduce("fig2", 2, scratch("fig2").string());
    EXPECT_EQ(s["runs"].size(), 2U);
}

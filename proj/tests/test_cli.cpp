#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "test_util.hpp"

using namespace sgmon;
using namespace sgmon::testing;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  Outcome o;
  o.code = cli::run(args, out, err, in);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::path(::testing::TempDir()) /
           ("sgmon_cli_" + std::string(::testing::UnitTest::GetInstance()
                                           ->current_test_info()
                                           ->name()));
    std::filesystem::create_directories(dir_);
    unsetenv(cli::kObjectModelEnv);
  }
  void TearDown() override {
    std::filesystem::remove_all(dir_);
    unsetenv(cli::kObjectModelEnv);
  }

  std::string write(const std::string& name, const std::string& text) {
    auto path = (dir_ / name).string();
    std::ofstream(path) << text;
    return path;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

const std::string kScene = source_path("samples/obstacle_scene.json");
const std::string kFarScene = source_path("samples/obstacle_scene_far.json");
const std::string kObstacleAhead = source_path("samples/obstacle_ahead.asg");

}  // namespace

TEST_F(Cli, CheckSatisfied) {
  auto o = run_cli({"check", "--om", "default", "--asg", kObstacleAhead, "--csg", kScene});
  EXPECT_EQ(o.code, 0) << o.err;
  auto lines = json_lines(o.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["result"], "Satisfied");
  EXPECT_EQ(lines[0]["witness"]["obstacle"], "obstacle");
}

TEST_F(Cli, CheckViolated) {
  auto o = run_cli({"check", "--asg", kObstacleAhead, "--csg", kFarScene});
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(json_lines(o.out)[0]["cause"]["index"], 1);
}

TEST_F(Cli, CheckReadsStdin) {
  auto o = run_cli({"check", "--asg", "builtin:obstacle_ahead", "--csg", "-"}, read_file(kScene));
  EXPECT_EQ(o.code, 0) << o.err;
}

TEST_F(Cli, ErrorVerdictTakesPrecedence) {
  auto scene = nlohmann::json::parse(read_file(kScene));
  scene["nodes"][1]["attrs"].erase("velocity");
  std::string csg = write("scene.json", scene.dump());
  auto o = run_cli({"check", "--asg", kObstacleAhead, "--asg", "builtin:P2-1", "--csg", csg});
  EXPECT_EQ(o.code, 3);
  auto lines = json_lines(o.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["result"], "Error");
  EXPECT_EQ(lines[0]["cause"]["attribute"], "obstacle.velocity");
  EXPECT_EQ(lines[1]["result"], "Violated");
}

TEST_F(Cli, MissingFileIsUsageError) {
  auto o = run_cli({"check", "--asg", kObstacleAhead, "--csg", path("absent.json")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("absent.json"), std::string::npos);
  EXPECT_TRUE(o.out.empty());
  EXPECT_EQ(run_cli({"check", "--asg", path("absent.asg"), "--csg", kScene}).code, 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"check", "--asg", kObstacleAhead}).code, 2);
  EXPECT_EQ(run_cli({"check", "--asg", kObstacleAhead, "--csg", kScene, "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({"check", "--asg", kObstacleAhead, "--csg", kScene, "--epsilon", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"gen"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--scenario", "P2", "--script", "x.json"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--scenario", "P9"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--scenario", "P2", "--perturb", "nope=1"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--scenario", "P2", "--perturb", "rear_gap"}).code, 2);
  EXPECT_EQ(run_cli({"export", "--asg", kObstacleAhead, "--csg", kScene}).code, 2);
  EXPECT_EQ(run_cli({"export"}).code, 2);
  EXPECT_EQ(run_cli({"bench", "--csg", kScene, "--nodes", "20"}).code, 2);
  EXPECT_EQ(run_cli({"monitor", "--in", kScene}).code, 2);
  EXPECT_EQ(run_cli({"monitor", "--in", kScene, "--phases", "P7"}).code, 2);
  auto help = run_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("monitor"), std::string::npos);
}

TEST_F(Cli, ObjectModelSelection) {
  std::string om = source_path("data/object_model.om");
  EXPECT_EQ(run_cli({"check", "--om", om, "--asg", kObstacleAhead, "--csg", kScene}).code, 0);
  std::string tiny = write("tiny.om", "class Vehicle { velocity: Real; }\n");
  EXPECT_EQ(run_cli({"check", "--om", tiny, "--asg", kObstacleAhead, "--csg", kScene}).code, 2);

  setenv(cli::kObjectModelEnv, tiny.c_str(), 1);
  EXPECT_EQ(run_cli({"check", "--asg", kObstacleAhead, "--csg", kScene}).code, 2);
  // An explicit flag wins over the environment.
  EXPECT_EQ(run_cli({"check", "--om", "default", "--asg", kObstacleAhead, "--csg", kScene}).code, 0);
  setenv(cli::kObjectModelEnv, om.c_str(), 1);
  EXPECT_EQ(run_cli({"check", "--asg", kObstacleAhead, "--csg", kScene}).code, 0);
}

TEST_F(Cli, GenAndMonitorP2Nominal) {
  std::string trace = path("p2.jsonl");
  ASSERT_EQ(run_cli({"gen", "--scenario", "P2", "--out", trace}).code, 0);
  auto o = run_cli({"monitor", "--om", "default", "--in", trace, "--phases", "P2"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.err.find("completed"), std::string::npos);
  EXPECT_EQ(o.err.find("not completed"), std::string::npos);
  auto lines = json_lines(o.out);
  ASSERT_EQ(lines.size(), 200u * 5u);
  std::set<int> phases;
  for (const auto& l : lines) phases.insert(l["phase_index"].get<int>());
  EXPECT_EQ(phases, (std::set<int>{0, 1, 2, 3, 4}));
}

TEST_F(Cli, MonitorWithPropsDirectory) {
  std::string trace = path("p1.jsonl");
  ASSERT_EQ(run_cli({"gen", "--scenario", "P1", "--out", trace}).code, 0);
  auto o = run_cli({"monitor", "--props", source_path("data/asg"), "--in", trace,
                    "--phases", "P1", "--out", path("v.jsonl")});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(o.out.empty());
  auto lines = json_lines(read_file(path("v.jsonl")));
  // Every bundled property is evaluated on each of the 120 frames.
  EXPECT_EQ(lines.size(), 120u * builtin_asg_names().size());
}

TEST_F(Cli, PerturbedTraceFailsPhaseMonitor) {
  auto gen = run_cli({"gen", "--scenario", "P2", "--perturb", "rear_gap=-20"});
  ASSERT_EQ(gen.code, 0);
  auto o = run_cli({"monitor", "--in", "-", "--phases", "P2"}, gen.out);
  EXPECT_EQ(o.code, 1);
  bool p22_failed = false;
  for (const auto& l : json_lines(o.out)) {
    if (l["property"] == "P2-2" && l["result"] == "Violated" &&
        l["cause"]["kind"] == "PredicateFailed") {
      p22_failed = true;
    }
  }
  EXPECT_TRUE(p22_failed);
}

TEST_F(Cli, PlainMonitorExitCodes) {
  std::string stream = read_file(kScene);
  stream.erase(std::remove(stream.begin(), stream.end(), '\n'), stream.end());
  EXPECT_EQ(run_cli({"monitor", "--props", kObstacleAhead, "--in", "-"}, stream + "\n").code, 0);
  std::string far = read_file(kFarScene);
  far.erase(std::remove(far.begin(), far.end(), '\n'), far.end());
  EXPECT_EQ(run_cli({"monitor", "--props", kObstacleAhead, "--in", "-"}, stream + "\n" + far).code, 1);
  auto limited = run_cli({"monitor", "--props", kObstacleAhead, "--in", "-", "--limit", "1"},
                         stream + "\n" + far);
  EXPECT_EQ(limited.code, 0);
  EXPECT_EQ(json_lines(limited.out).size(), 1u);
}

TEST_F(Cli, MonitorRejectsBadStreams) {
  auto scene = nlohmann::json::parse(read_file(kScene));
  std::string a = scene.dump();
  scene["t"] = -1.0;
  std::string back = scene.dump();
  auto o = run_cli({"monitor", "--props", kObstacleAhead, "--in", "-"}, a + "\n" + back + "\n");
  EXPECT_EQ(o.code, 2);
  EXPECT_EQ(json_lines(o.out).size(), 1u);  // verdicts before the bad scene survive
  auto bad = run_cli({"monitor", "--props", kObstacleAhead, "--in", "-"}, a + "\n{oops\n");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos);
}

TEST_F(Cli, Deterministic) {
  for (int round = 0; round < 2; ++round) {
    auto gen = run_cli({"gen", "--scenario", "P1", "--perturb", "rear_gap=-5",
                        "--out", path("t" + std::to_string(round))});
    ASSERT_EQ(gen.code, 0);
    auto mon = run_cli({"monitor", "--in", path("t" + std::to_string(round)), "--phases", "P1",
                        "--out", path("v" + std::to_string(round))});
    ASSERT_NE(mon.code, 2);
  }
  EXPECT_EQ(read_file(path("t0")), read_file(path("t1")));
  EXPECT_EQ(read_file(path("v0")), read_file(path("v1")));
}

TEST_F(Cli, OracleMode) {
  auto o = run_cli({"check", "--oracle", "--asg", kObstacleAhead, "--csg", kScene});
  EXPECT_EQ(o.code, 0) << o.err;
  auto gen = run_cli({"gen", "--scenario", "P1"});
  EXPECT_EQ(run_cli({"monitor", "--oracle", "--phases", "P1", "--in", "-"}, gen.out).code, 0);
}

TEST_F(Cli, Bench) {
  auto o = run_cli({"bench", "--nodes", "30", "--runs", "5"});
  EXPECT_EQ(o.code, 0) << o.err;
  auto j = json_lines(o.out).at(0);
  EXPECT_EQ(j["property"], "P2-2");
  EXPECT_EQ(j["nodes"], 30);
  EXPECT_EQ(j["samples"], 5);
  EXPECT_LE(j["p50_ms"].get<double>(), j["p99_ms"].get<double>());

  auto stream = run_cli({"gen", "--scenario", "P2"});
  auto b = run_cli({"bench", "--in", "-", "--asg", "builtin:P2-1", "--runs", "2"}, stream.out);
  EXPECT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(json_lines(b.out).at(0)["samples"], 400);
}

TEST_F(Cli, Export) {
  auto o = run_cli({"export", "--asg", kObstacleAhead});
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("digraph", 0), 0u);
  EXPECT_NE(o.out.find("dist(ego, obstacle) in (0, 20]"), std::string::npos);
  auto s = run_cli({"export", "--csg", kScene, "--out", path("scene.dot")});
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(read_file(path("scene.dot")).find("inFrontOf"), std::string::npos);
}

// The installed binary maps outcomes to the same exit statuses.
TEST_F(Cli, BinaryExitStatus) {
  auto status = [&](const std::string& args) {
    std::string cmd = std::string(SGMON_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  EXPECT_EQ(status("check --asg " + kObstacleAhead + " --csg " + kScene), 0);
  EXPECT_EQ(status("check --asg " + kObstacleAhead + " --csg " + kFarScene), 1);
  EXPECT_EQ(status("check --asg " + kObstacleAhead + " --csg " + path("missing.json")), 2);
  EXPECT_EQ(status("gen --scenario P2 --perturb rear_gap=-20 --out " + path("t.jsonl")), 0);
  EXPECT_EQ(status("monitor --phases P2 --in " + path("t.jsonl")), 1);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CmdResult {
  int status = -1;
  std::string output;
};

CmdResult run_cmd(const std::string& cmd) {
  CmdResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int rc = pclose(pipe);
  if (WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
  return r;
}

std::string bin() {
  const char* b = std::getenv("EPSHAPE_BIN");
  EXPECT_NE(b, nullptr) << "EPSHAPE_BIN must point at the CLI binary";
  return b ? std::string("\"") + b + "\"" : std::string();
}

std::string scenario(const std::string& name) {
  const char* dir = std::getenv("EPSHAPE_SCENARIO_DIR");
  EXPECT_NE(dir, nullptr);
  return std::string("\"") + (dir ? dir : ".") + "/" + name + "\"";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.is_open()) << path;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::path(testing::TempDir()) / "epshape_cli" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(RunCommand, WritesOutputsAndExitsClean) {
  const fs::path out = fresh_dir("run_ok");
  const CmdResult r = run_cmd(bin() + " run " + scenario("uwv_steady_stable.json") +
                              " --out \"" + out.string() + "\" 2>/dev/null");
  ASSERT_EQ(r.status, 0);

  const json report = json::parse(read_file(out / "report.json"));
  EXPECT_EQ(report.at("exit_status").get<int>(), 0);
  EXPECT_EQ(report.at("system").get<std::string>(), "underwater_vehicle");
  EXPECT_EQ(json::parse(r.output), report);

  const std::string csv = read_file(out / "trajectory.csv");
  EXPECT_EQ(csv.substr(0, 8), "t,Pi_x,P");
}

TEST(RunCommand, RepeatedRunsAreByteIdentical) {
  const fs::path out_a = fresh_dir("run_a");
  const fs::path out_b = fresh_dir("run_b");
  const std::string tail = " run " + scenario("uwv_drift.json") + " --out \"";
  ASSERT_EQ(run_cmd(bin() + tail + out_a.string() + "\" 2>/dev/null").status, 0);
  ASSERT_EQ(run_cmd(bin() + tail + out_b.string() + "\" 2>/dev/null").status, 0);
  EXPECT_EQ(read_file(out_a / "trajectory.csv"), read_file(out_b / "trajectory.csv"));
  EXPECT_EQ(read_file(out_a / "report.json"), read_file(out_b / "report.json"));
}

TEST(RunCommand, ReconstructAddsPoseColumns) {
  const fs::path out = fresh_dir("run_recon");
  const CmdResult r = run_cmd(bin() + " run " + scenario("uwv_uncontrolled.json") +
                              " --reconstruct --out \"" + out.string() + "\" 2>/dev/null");
  ASSERT_EQ(r.status, 0);
  const std::string csv = read_file(out / "trajectory.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_NE(header.find("R_xx"), std::string::npos);
  EXPECT_NE(header.find(",x_x"), std::string::npos);
}

TEST(RunCommand, BadInputExitsTwo) {
  const CmdResult missing = run_cmd(bin() + " run /nonexistent/s.json 2>&1");
  EXPECT_EQ(missing.status, 2);
  EXPECT_NE(missing.output.find("error:"), std::string::npos);

  const fs::path dir = fresh_dir("run_bad");
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{\"system\": \"underwater_vehicle\"}";
  const CmdResult r = run_cmd(bin() + " run \"" + bad.string() + "\" 2>&1");
  EXPECT_EQ(r.status, 2);
}

TEST(RunCommand, DivergentRunExitsThree) {
  const fs::path out = fresh_dir("run_blowup");
  const CmdResult r = run_cmd(bin() + " run " + scenario("uwv_blowup.json") +
                              " --out \"" + out.string() + "\" 2>&1");
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.output.find("error:"), std::string::npos);
}

TEST(VerifyCommand, FullSuitePasses) {
  const CmdResult r = run_cmd(bin() + " verify 2>/dev/null");
  ASSERT_EQ(r.status, 0);
  const json rep = json::parse(r.output);
  EXPECT_TRUE(rep.at("all_pass").get<bool>());
  EXPECT_GE(rep.at("properties").size(), 20u);
  for (const json& p : rep.at("properties")) {
    EXPECT_TRUE(p.at("pass").get<bool>()) << p.at("name").get<std::string>();
  }
}

TEST(VerifyCommand, FilterSelectsMatchingProperties) {
  const CmdResult r = run_cmd(bin() + " verify --filter casimir 2>/dev/null");
  ASSERT_EQ(r.status, 0);
  const json rep = json::parse(r.output);
  ASSERT_FALSE(rep.at("properties").empty());
  for (const json& p : rep.at("properties")) {
    EXPECT_NE(p.at("name").get<std::string>().find("casimir"), std::string::npos);
  }
}

TEST(VerifyCommand, SeedComesFromEnvironmentOrFlag) {
  const CmdResult env_run =
      run_cmd("EPSHAPE_SEED=7 " + bin() + " verify --filter jacobi 2>/dev/null");
  ASSERT_EQ(env_run.status, 0);
  EXPECT_EQ(json::parse(env_run.output).at("seed").get<unsigned>(), 7u);

  const CmdResult flag_run =
      run_cmd("EPSHAPE_SEED=7 " + bin() + " verify --seed 9 --filter jacobi 2>/dev/null");
  ASSERT_EQ(flag_run.status, 0);
  EXPECT_EQ(json::parse(flag_run.output).at("seed").get<unsigned>(), 9u);
}

TEST(VerifyCommand, MutationFailsAndNamesTheProperty) {
  const CmdResult r =
      run_cmd(bin() + " verify --mutate drift_force_term --filter matching 2>/dev/null");
  ASSERT_EQ(r.status, 1);
  const json rep = json::parse(r.output);
  EXPECT_FALSE(rep.at("all_pass").get<bool>());
  bool saw_failed_drift = false;
  for (const json& p : rep.at("properties")) {
    if (p.at("name").get<std::string>() == "matching_drift_control") {
      saw_failed_drift = !p.at("pass").get<bool>();
    }
  }
  EXPECT_TRUE(saw_failed_drift);

  const CmdResult text =
      run_cmd(bin() + " verify --mutate steady_gravity_term --filter matching 2>&1 >/dev/null");
  EXPECT_EQ(text.status, 1);
  EXPECT_NE(text.output.find("[FAIL] matching_steady_control"), std::string::npos);
}

TEST(VerifyCommand, UnknownMutationExitsTwo) {
  const CmdResult r = run_cmd(bin() + " verify --mutate bogus 2>&1");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("unknown mutation"), std::string::npos);
}

TEST(StabilityCommand, ClassifiesShippedScenarios) {
  const CmdResult stable =
      run_cmd(bin() + " stability " + scenario("uwv_steady_stable.json") + " 2>/dev/null");
  ASSERT_EQ(stable.status, 0);
  EXPECT_EQ(json::parse(stable.output).at("classification").get<std::string>(),
            "spectrally_stable");

  const CmdResult unstable =
      run_cmd(bin() + " stability " + scenario("uwv_steady_unstable.json") + " 2>/dev/null");
  ASSERT_EQ(unstable.status, 0);
  EXPECT_EQ(json::parse(unstable.output).at("classification").get<std::string>(), "unstable");
}

TEST(StabilityCommand, NonEquilibriumExitsFour) {
  const CmdResult r = run_cmd(bin() + " stability " +
                              scenario("uwv_uncontrolled_desired.json") + " 2>&1");
  EXPECT_EQ(r.status, 4);
  EXPECT_NE(r.output.find("error:"), std::string::npos);
}

TEST(Cli, UsageErrorsAndHelp) {
  EXPECT_EQ(run_cmd(bin() + " 2>&1").status, 2);
  EXPECT_EQ(run_cmd(bin() + " frobnicate 2>&1").status, 2);
  const CmdResult help = run_cmd(bin() + " --help 2>&1");
  EXPECT_EQ(help.status, 0);
  EXPECT_NE(help.output.find("verify"), std::string::npos);
}

}  // namespace

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "platoon/serialization.hpp"

using namespace platoon;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("platoon_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(PLATOON_CLI_PATH) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string out() const { return "--out " + dir_.string(); }
  Json json(const std::string& name) const { return read_json_file(dir_ / name); }
  std::string text(const fs::path& p) const {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string first_line(const std::string& name) const {
    const std::string all = text(dir_ / name);
    return all.substr(0, all.find('\n'));
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthesizeReferenceInputs) {
  ASSERT_EQ(run("synthesize " + out() + " --ka 0.5 --kv 0.67 --kp 0.014 --hw 0.75"), 0);
  const Json doc = json("synthesis.json");
  EXPECT_EQ(doc.at("kind"), "synthesis_result");
  const SynthesisResult r = doc.get<SynthesisResult>();
  EXPECT_NEAR(r.region.a1, 0.6667, 1e-4);
  EXPECT_NEAR(r.region.b1, 1.7778, 1e-4);
  EXPECT_NEAR(r.region.a2, 0.6818, 1e-4);
  EXPECT_NEAR(r.region.b2, 0.9091, 1e-4);
  EXPECT_NEAR(r.hwChosen, 0.75, 1e-12);
  EXPECT_TRUE(r.certification.robust());
  EXPECT_EQ(first_line("region.csv"), "kv_scaled,kp_scaled,kv,kp");
}

TEST_F(Cli, ExitStatusTaxonomy) {
  EXPECT_EQ(run("synthesize " + out() + " --ka 1.2"), 2);
  EXPECT_EQ(run("synthesize --out " + (dir_ / "missing").string()), 4);
  EXPECT_EQ(run("synthesize " + out() + " --ka 0.5 --kp 0.02 --kv 0.67 --hw 0.75"), 2);
  EXPECT_EQ(run("verify " + out() + " --ka 0.5 --kp 0.014 --hw 0.75"), 2);  // kv missing
  EXPECT_EQ(run("falsify " + out() + " --ka 0.9 --kv 0.5 --kp 0.1 --hw 1"), 5);
  EXPECT_EQ(run("falsify " + out() + " --ka 1.5 --kv 0.5 --kp 0.1 --hw 1 --ell 0"), 5);
  EXPECT_EQ(run("falsify " + out() + " --ka 1.0 --kv 0.5 --kp 0.01 --hw 1 --tau0 1e-6 --set max_harmonic=1"), 6);
  EXPECT_EQ(run("frobnicate " + out()), 2);
  EXPECT_EQ(run("verify " + out() + " --set nonsense"), 2);
  EXPECT_EQ(run("verify " + out() + " --ka abc --kv 1 --kp 1 --hw 1"), 2);
  EXPECT_EQ(run("simulate " + out() + " --variant nope"), 2);
  EXPECT_EQ(run("simulate " + out() + " --config " + (dir_ / "absent.json").string()), 4);
}

TEST_F(Cli, MissingOutputDirectoryFailsBeforeComputing) {
  const fs::path missing = dir_ / "missing";
  EXPECT_EQ(run("paper-repro --out " + missing.string()), 4);
  EXPECT_FALSE(fs::exists(missing));
}

TEST_F(Cli, VerifyWritesReportAndCurves) {
  ASSERT_EQ(run("verify " + out() + " --ka 0.5 --kv 0.67 --kp 0.014 --hw 0.75"), 0);
  const StabilityReport rep = json("stability_report.json").get<StabilityReport>();
  EXPECT_TRUE(rep.robust());
  EXPECT_EQ(first_line("magnitude.csv"),
            "omega,H1_tau0.0005,H1_tau0.005,H1_tau0.05,H1_tau0.25,H1_tau0.5");

  ASSERT_EQ(run("verify " + out() + " --ka 0.2 --kv 0.16 --kp 0.02 --hw 0.4 --r 3"), 0);
  const Json doc = json("stability_report.json");
  ASSERT_EQ(doc.at("perBranchPeaks").size(), 2u);
  for (const auto& b : doc.at("perBranchPeaks")) EXPECT_LE(3 * b.at("peak").get<double>(), 1 + 1e-9);
  EXPECT_TRUE(doc.contains("sumOfNorms"));
  EXPECT_NE(first_line("magnitude.csv").find("H2_tau0.5"), std::string::npos);
}

TEST_F(Cli, VerifyAccReduction) {
  ASSERT_EQ(run("verify " + out() + " --ka 0 --ell 0 --kv 0.995 --kp 0.0025 --hw 1.01"), 0);
  EXPECT_TRUE(json("stability_report.json").at("stringStable").get<bool>());
}

TEST_F(Cli, FalsifyWritesWitness) {
  ASSERT_EQ(run("falsify " + out() + " --ka 1.5 --kv 0.5 --kp 0.1 --hw 1"), 0);
  const Json doc = json("witness.json");
  EXPECT_GT(doc.at("magnitude").get<double>(), 1.0);
  EXPECT_GT(doc.at("reevaluatedMagnitude").get<double>(), 1.0);
  EXPECT_EQ(doc.at("harmonicIndex"), 1);
}

TEST_F(Cli, SweepOverHeadways) {
  ASSERT_EQ(run("sweep " + out() + " --grid 5000 --set tau_grid=10"), 0);
  const Json doc = json("sweep.json");
  ASSERT_EQ(doc.at("entries").size(), 3u);
  const auto& e = doc.at("entries");
  EXPECT_EQ(e[0].at("hw"), 0.65);
  EXPECT_FALSE(e[0].at("report").at("stringStable").get<bool>());
  EXPECT_GT(e[0].at("report").at("peakMagnitude").get<double>(), 1.001);
  // At the bound itself the fixed gains are marginally outside the region.
  EXPECT_LT(e[1].at("report").at("peakMagnitude").get<double>(), 1.001);
  EXPECT_TRUE(e[2].at("report").at("stringStable").get<bool>());
  EXPECT_EQ(first_line("sweep.csv"), "omega,hw0.65,hw0.7333,hw0.75");
}

TEST_F(Cli, SimulateIsDeterministicAndHonoursOverrides) {
  ASSERT_EQ(run("simulate " + out() + " --variant cacc-unstable --duration 20 --step 0.002"), 0);
  const std::string trace = text(dir_ / "trace.csv");
  const std::string metrics = text(dir_ / "metrics.json");
  const Json doc = json("metrics.json");
  EXPECT_EQ(doc.at("scenario").at("duration"), 20.0);
  EXPECT_EQ(doc.at("scenario").at("stepSize"), 0.002);
  EXPECT_EQ(first_line("platoon_length.csv"), "time,length");
  ASSERT_EQ(run("simulate " + out() + " --variant cacc-unstable --duration 20 --step 0.002"), 0);
  EXPECT_EQ(text(dir_ / "trace.csv"), trace);
  EXPECT_EQ(text(dir_ / "metrics.json"), metrics);
}

TEST_F(Cli, ConfigFileWithOverrides) {
  Scenario s = build_paper_scenario(PaperVariant::CaccStable);
  s.nFollowers = 3;
  s.vehicles.resize(3);
  s.duration = 5.0;
  write_file_atomic(dir_ / "cfg.json", dump_document(make_document("simulation_config", {{"scenario", s}})));
  ASSERT_EQ(run("simulate " + out() + " --config " + (dir_ / "cfg.json").string() + " --set duration=2"), 0);
  const Json doc = json("metrics.json");
  EXPECT_EQ(doc.at("scenario").at("nFollowers"), 3);
  EXPECT_EQ(doc.at("scenario").at("duration"), 2.0);

  std::ofstream(dir_ / "old.json") << R"({"schema_version": 0})";
  EXPECT_EQ(run("simulate " + out() + " --config " + (dir_ / "old.json").string()), 2);
  std::ofstream(dir_ / "broken.json") << "{";
  EXPECT_EQ(run("simulate " + out() + " --config " + (dir_ / "broken.json").string()), 2);
}

TEST_F(Cli, SimulationBlowupIsNumericalFailure) {
  Scenario s = build_paper_scenario(PaperVariant::CaccStable);
  s.nFollowers = 2;
  s.vehicles.resize(2);
  for (auto& v : s.vehicles) {
    v.gains = {0.5, 0.01, 5.0, 0.1, 0.1, 1};
    v.spacing.hw = 0.1;
  }
  s.stepSize = 0.01;
  s.duration = 2000.0;
  write_file_atomic(dir_ / "cfg.json", dump_document(make_document("simulation_config", {{"scenario", s}})));
  EXPECT_EQ(run("simulate " + out() + " --config " + (dir_ / "cfg.json").string()), 3);
}

TEST_F(Cli, ReproductionRunSingleVariant) {
  ASSERT_EQ(run("paper-repro " + out() + " --variant cacc-stable --duration 30"), 0);
  const Json summary = json("summary.json");
  EXPECT_NEAR(summary.at("hwBoundCacc").get<double>(), 0.7333, 1e-4);
  EXPECT_NEAR(summary.at("hwBoundCaccPlus").get<double>(), 0.35, 1e-12);
  EXPECT_TRUE(summary.at("runs").contains("cacc-stable"));
  EXPECT_TRUE(fs::exists(dir_ / "cacc-stable" / "trace.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "design_caccplus_region.csv"));
}

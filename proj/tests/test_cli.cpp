#include "cli.hpp"

#include "holopt/hash.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("holopt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return holopt::cli::run(args, out_, err_);
  }

  json manifest(const std::string& stem) const {
    std::ifstream f(dir_ / (stem + ".manifest.json"));
    return json::parse(f);
  }

  std::string d() const { return dir_.string(); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, LosslessSimulateIsExact) {
  ASSERT_EQ(run({"simulate", "--system", "ensemble-rei", "--gate", "hadamard", "--lossless",
                 "--out-dir", d()}),
            0)
      << err_.str();
  const auto m = manifest("simulate");
  EXPECT_NEAR(m["results"]["final_fidelity"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(m["outputs"]["simulate.csv"], holopt::sha256_file(dir_ / "simulate.csv"));
  EXPECT_EQ(m["command"], "simulate");
  std::ifstream csv(dir_ / "simulate.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "time_s,rabi0_hz,rabi1_hz,p0,pe,p1,fidelity");
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"reproduce", "fig99", "--out-dir", d()}), holopt::cli::kExitUsage);
  EXPECT_NE(err_.str().find("fig12"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--no-such-flag"}), holopt::cli::kExitUsage);
  EXPECT_EQ(run({"simulate", "--system", "qutrit", "--out-dir", d()}), holopt::cli::kExitUsage);
  EXPECT_EQ(run({"simulate", "--delta", "1", "--delta-mhz", "1"}), holopt::cli::kExitUsage);
  EXPECT_EQ(run({}), holopt::cli::kExitUsage);
  EXPECT_EQ(run({"--config", (dir_ / "missing.json").string()}), holopt::cli::kExitUsage);
}

TEST_F(CliTest, HelpAndVersionExitZero) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("simulate"), std::string::npos);
  EXPECT_EQ(run({"--version"}), 0);
  EXPECT_FALSE(out_.str().empty());
}

TEST_F(CliTest, IntegratorFailureExitsThree) {
  EXPECT_EQ(run({"simulate", "--max-step-fraction", "1e-7", "--out-dir", d()}),
            holopt::cli::kExitNumerical);
  EXPECT_NE(err_.str().find("integration failed"), std::string::npos);
}

TEST_F(CliTest, ConfigReplayReproducesOutputs) {
  ASSERT_EQ(run({"sweep", "--system", "transmon", "--gate", "not", "--lo-mhz", "-2", "--hi-mhz",
                 "2", "--points", "5", "--svg", "--out-dir", d(), "--name", "first"}),
            0)
      << err_.str();
  const auto first = manifest("first");
  const auto cfg = (dir_ / "first.manifest.json").string();
  ASSERT_EQ(run({"--config", cfg, "--name", "second"}), 0) << err_.str();
  const auto second = manifest("second");
  EXPECT_EQ(first["outputs"]["first.csv"], second["outputs"]["second.csv"]);
  EXPECT_EQ(first["results"], second["results"]);
}

TEST_F(CliTest, ShowWritesJson) {
  ASSERT_EQ(run({"show", "presets", "--out-dir", d()}), 0) << err_.str();
  std::ifstream f(dir_ / "show.json");
  const auto j = json::parse(f);
  EXPECT_FALSE(j.empty());
  EXPECT_EQ(run({"show", "nonsense", "--out-dir", d()}), holopt::cli::kExitUsage);
}

TEST_F(CliTest, ScheduleDumpReloads) {
  ASSERT_EQ(run({"simulate", "--system", "single-rei", "--gate", "sigma-y", "--delta-khz", "50",
                 "--dump-schedule", "--out-dir", d(), "--name", "a"}),
            0)
      << err_.str();
  ASSERT_EQ(run({"simulate", "--system", "single-rei", "--gate", "sigma-y", "--delta-khz", "50",
                 "--schedule", (dir_ / "a.schedule.json").string(), "--out-dir", d(), "--name", "b"}),
            0)
      << err_.str();
  EXPECT_EQ(holopt::sha256_file(dir_ / "a.csv"), holopt::sha256_file(dir_ / "b.csv"));
}

}  // namespace

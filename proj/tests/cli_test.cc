// Copyright 2026 The dpasync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Smoke tests for the command-line tool. Each case shells out to the built
// binary and inspects the files it writes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpasync_cli_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(const std::string& args) const {
    const std::string cmd = std::string(DPASYNC_CLI_PATH) + " " + args +
                            " > " + (dir_ / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Path(const std::string& rel) const { return (dir_ / rel).string(); }

  static std::string Slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::string FirstLine(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthThenTrain) {
  ASSERT_EQ(Run("synth --dim 3 --owner-sizes 50,80 --eps 1,inf --seed 4 --out " +
                Path("data")),
            0);
  EXPECT_EQ(FirstLine(Path("data/owners.csv")), "owner,x1,x2,x3,y");
  ASSERT_EQ(Run("train --input " + Path("data/owners.csv") +
                " --eps 1,inf --T 40 --stride 10 --seed 5 --out " +
                Path("run")),
            0);
  EXPECT_EQ(FirstLine(Path("run/trajectory.csv")), "k,t_k,owner,psi");
  EXPECT_EQ(FirstLine(Path("run/schedule.csv")), "k,t_k,owner");
  EXPECT_TRUE(fs::exists(Path("run/manifest.txt")));
}

TEST_F(CliTest, SweepReplaysFromManifest) {
  ASSERT_EQ(Run("sweep --owners 2 --owner-sizes 60 --eps 1,4 --runs 3 --T 50"
                " --stride 10 --seed 9 --out " + Path("a")),
            0);
  EXPECT_EQ(FirstLine(Path("a/sweep.csv")), "n,eps,N,mean_psi,bound_psi");
  EXPECT_EQ(FirstLine(Path("a/cells/cell_000/percentiles.csv")), "k,p25,p50,p75");
  ASSERT_EQ(Run("--config " + Path("a/manifest.txt") + " sweep --out " + Path("b")),
            0);
  EXPECT_EQ(Slurp(Path("a/sweep.csv")), Slurp(Path("b/sweep.csv")));
  EXPECT_EQ(Slurp(Path("a/cells/cell_001/percentiles.csv")),
            Slurp(Path("b/cells/cell_001/percentiles.csv")));
}

TEST_F(CliTest, BoundsAndReport) {
  ASSERT_EQ(Run("bounds --cbar1 0.9 --cbar2 0.6 --n 10000 --eps 0.1,1,10"
                " --owners 3 --T 1000 --out " + Path("b")),
            0);
  EXPECT_TRUE(fs::exists(Path("b/bounds.csv")));
  EXPECT_EQ(FirstLine(Path("b/distance.csv")), "n,eps,distance_bound");
  ASSERT_EQ(Run("report --kind two-cluster --owners 1,2 --owner-sizes 40"
                " --eps 10 --runs 2 --T 30 --seed 3 --out " + Path("r")),
            0);
  EXPECT_EQ(FirstLine(Path("r/report.csv")), "N,n_i,eps,mean_psi,solo_psi,benefit");
}

TEST_F(CliTest, RejectsBadInput) {
  EXPECT_NE(Run("train --mode sometimes --out " + Path("x")), 0);
  EXPECT_NE(Run("train --input " + Path("missing.csv") + " --out " + Path("x")), 0);
  EXPECT_NE(Run("sweep --runs 0 --out " + Path("x")), 0);
  EXPECT_NE(Run(""), 0);
}

}  // namespace

/* Copyright 2026 The DICM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "dicm/cli/commands.h"
#include "dicm/cli/experiment_config.h"
#include "dicm/common/error.h"

namespace dicm::cli {
namespace {

namespace fs = std::filesystem;

const char kSmall[] = R"(data:
  users: 40
  items: 60
  images: 40
  behaviors_min: 2
  behavior_cap: 10
  days: 3
  impressions_per_user_day: 4
model:
  d_id: 4
  d_raw: 16
  d_img: 4
  b_max: 6
  mlp_hidden: [12, 6]
  attention_hidden: 6
cluster:
  workers: 2
  servers: 2
  per_worker_batch: 16
train:
  epochs: 1
  lr: 0.01
)";

std::string TempDir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dicm_cli_" + name);
  fs::remove_all(p);
  return p.string();
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string ErrorOf(const std::string& text) {
  try {
    ParseExperimentConfig(text, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigTest, DefaultsMatchDeskScale) {
  const auto c = ParseExperimentConfig("");
  EXPECT_EQ(c.cluster.workers, 4u);
  EXPECT_EQ(c.cluster.servers, 2u);
  EXPECT_EQ(c.cluster.per_worker_batch, 64u);
  EXPECT_EQ(c.model.d_raw, 64u);
  EXPECT_EQ(c.model.d_img, 12u);
}

TEST(ConfigTest, UnknownKeysCiteLineAndKey) {
  const std::string e = ErrorOf("data:\n  users: 3\n  userz: 4\n");
  EXPECT_NE(e.find("cfg.yaml:3"), std::string::npos) << e;
  EXPECT_NE(e.find("data.userz"), std::string::npos) << e;
  const std::string s = ErrorOf("model:\n  d_id: 4\nmodle:\n  d_id: 3\n");
  EXPECT_NE(s.find("cfg.yaml:3"), std::string::npos) << s;
  EXPECT_NE(s.find("modle"), std::string::npos) << s;
}

TEST(ConfigTest, BadValuesCiteLineAndKey) {
  const std::string t = ErrorOf("train:\n  epochs: many\n");
  EXPECT_NE(t.find("cfg.yaml:2"), std::string::npos) << t;
  EXPECT_NE(t.find("train.epochs"), std::string::npos) << t;
  const std::string m = ErrorOf("cluster:\n  workers: 2\n  mode: ps\n");
  EXPECT_NE(m.find("cfg.yaml:3"), std::string::npos) << m;
  EXPECT_NE(m.find("cluster.mode"), std::string::npos) << m;
  EXPECT_NE(ErrorOf("data: [1, 2]\n").find("must be a mapping"), std::string::npos);
  EXPECT_NE(ErrorOf("data:\n  users: [\n").find("cfg.yaml:"), std::string::npos);
  EXPECT_FALSE(ErrorOf("cluster:\n  workers: 0\n").empty());
}

TEST(ConfigTest, ResolvedYamlRoundTrips) {
  auto c = ParseExperimentConfig(kSmall);
  c.eval.sweep = {"sum", "attn"};
  c.model.image_hidden = {8, 6};
  c.train.lr = 0.1 + 0.2;
  const std::string yaml = ToYaml(c);
  const auto back = ParseExperimentConfig(yaml);
  EXPECT_EQ(ToYaml(back), yaml);
  EXPECT_EQ(back.train.lr, c.train.lr);
  EXPECT_EQ(back.eval.sweep, c.eval.sweep);
}

TEST(CommandTest, EvalOnSeparableScoresReportsAucOne) {
  const std::string dir = TempDir("eval");
  fs::create_directories(dir);
  std::ofstream(dir + "/scores.csv") << "user,score,label\n0,0.9,1\n0,0.1,0\n1,0.8,1\n1,0.3,0\n"
                                        "1,0.2,0\n";
  auto c = ParseExperimentConfig("");
  c.paths.out_dir = dir;
  c.paths.scores = dir + "/scores.csv";
  std::ostringstream log;
  CmdEval(c, log);
  const std::string report = ReadText(dir + "/eval.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), "model,split,samples,auc,gauc,logloss");
  EXPECT_NE(report.find(",5,1,1,"), std::string::npos) << report;
}

TEST(CommandTest, AccountingPrintsCompressionAbove340) {
  auto c = ParseExperimentConfig(kSmall);
  c.model.d_raw = 4096;
  c.model.d_img = 12;
  c.paths.out_dir = TempDir("accounting");
  std::ostringstream log;
  CmdAccounting(c, log);
  std::smatch m;
  const std::string out = log.str();
  ASSERT_TRUE(std::regex_search(out, m, std::regex("compression ratio[^:]*: ([0-9.]+)"))) << out;
  EXPECT_GE(std::stod(m[1]), 340.0);
  EXPECT_NEAR(std::stod(m[1]), 4096.0 / 12.0, 0.01);
  const std::string csv = ReadText(c.paths.out_dir + "/accounting.csv");
  EXPECT_NE(csv.find("\nams,"), std::string::npos);
  EXPECT_NE(csv.find("\nps-store-in-server,"), std::string::npos);
  EXPECT_NE(csv.find("\nstore-in-worker,"), std::string::npos);
}

TEST(CommandTest, TrainTwiceSameSeedGivesIdenticalMetrics) {
  auto c = ParseExperimentConfig(kSmall);
  std::ostringstream log;
  c.paths.out_dir = TempDir("train_a");
  CmdTrain(c, log);
  c.paths.out_dir = TempDir("train_b");
  CmdTrain(c, log);
  const std::string ma = ReadText(fs::temp_directory_path() / "dicm_cli_train_a/metrics.csv");
  const std::string mb = ReadText(fs::temp_directory_path() / "dicm_cli_train_b/metrics.csv");
  EXPECT_FALSE(ma.empty());
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(ma.substr(0, 18), "iteration,loss,lr\n");
}

TEST(CommandTest, ResolvedConfigReproducesTheRun) {
  auto c = ParseExperimentConfig(kSmall);
  c.train.trainer = "reference";
  c.train.batch_size = 32;
  std::ostringstream log;
  c.paths.out_dir = TempDir("repro_a");
  CmdTrain(c, log);
  auto again = LoadExperimentConfig(c.paths.out_dir + "/resolved_config.yaml");
  const std::string first = ReadText(c.paths.out_dir + "/metrics.csv");
  again.paths.out_dir = TempDir("repro_b");
  CmdTrain(again, log);
  EXPECT_EQ(ReadText(again.paths.out_dir + "/metrics.csv"), first);
  EXPECT_EQ(ReadText(again.paths.out_dir + "/checkpoint.bin"),
            ReadText(c.paths.out_dir + "/checkpoint.bin"));
}

TEST(CommandTest, MainExitCodes) {
  const std::string dir = TempDir("main");
  fs::create_directories(dir);
  std::ofstream(dir + "/bad.yaml") << "train:\n  epochs: 1\n  colour: red\n";
  std::string cfg = dir + "/bad.yaml";
  const char* bad[] = {"dicm", "accounting", "--config", cfg.c_str()};
  EXPECT_NE(Main(4, const_cast<char**>(bad)), 0);
  const char* mode[] = {"dicm", "accounting", "--mode", "nope"};
  EXPECT_NE(Main(4, const_cast<char**>(mode)), 0);
  std::ofstream(dir + "/ok.yaml") << kSmall;
  cfg = dir + "/ok.yaml";
  const std::string out = dir + "/out";
  const char* ok[] = {"dicm", "accounting", "--config", cfg.c_str(), "--out", out.c_str(),
                      "--seed", "3"};
  EXPECT_EQ(Main(8, const_cast<char**>(ok)), 0);
  const auto resolved = LoadExperimentConfig(out + "/resolved_config.yaml");
  EXPECT_EQ(resolved.data.seed, 3u);
  EXPECT_EQ(resolved.train.seed, 3u);
}

}  // namespace
}  // namespace dicm::cli

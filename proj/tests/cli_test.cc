//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpaudit/cli.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

namespace dpaudit {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpaudit_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string WriteConfig(const nlohmann::ordered_json& j,
                          const std::string& name = "config.json") {
    std::string path = (dir_ / name).string();
    std::ofstream out(path);
    out << j.dump(2);
    return path;
  }

  std::string ReadFile(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  nlohmann::ordered_json MinimalConfig() {
    return nlohmann::ordered_json{
        {"schema",
         {{"attributes",
           {{{"name", "a"}, {"categories", {"a0", "a1"}}},
            {{"name", "b"}, {"categories", {"b0", "b1"}}},
            {{"name", "c"}, {"categories", {"c0", "c1"}}}}}}},
        {"mechanism",
         {{"kind", "privbayes"}, {"epsilon", 1.0}, {"min_dminus", 2}}},
        {"attack", "dcr"},
        {"pair",
         {{"source", "worstcase"},
          {"variant", "edit"},
          {"small", true},
          {"narrow", false},
          {"repeat", false}}},
        {"n_models", 30},
        {"split", {0.6, 0.2, 0.2}},
        {"synth_size", 15},
        {"delta", 0.0},
        {"confidence", 0.95},
        {"method", "eps_delta_region"},
        {"folds", 2},
        {"master_seed", 99}};
  }

  fs::path dir_;
};

TEST_F(CliTest, AuditSmokeRunWritesArtifacts) {
  std::string cfg = WriteConfig(MinimalConfig());
  std::string out = (dir_ / "out").string();
  RunManifest m;
  std::ostringstream log;
  int rc = cmd_audit(cfg, out, 1, &m, log);
  EXPECT_EQ(rc, kExitOk);
  EXPECT_TRUE(fs::exists(m.report_path));
  EXPECT_TRUE(fs::exists(m.scores_path));
  EXPECT_TRUE(fs::exists(out + "/manifest.json"));
  nlohmann::json report = nlohmann::json::parse(ReadFile(m.report_path));
  EXPECT_TRUE(report.contains("estimate"));
  EXPECT_TRUE(report.contains("folds"));
  EXPECT_FALSE(report.contains("wall_clock_s"));  // reports must replay
  ScoreSet scores = load_scores_csv(m.scores_path);
  EXPECT_EQ(scores.entries.size(), 30u);
}

TEST_F(CliTest, UnknownMechanismNamesTheField) {
  nlohmann::ordered_json j = MinimalConfig();
  j["mechanism"]["kind"] = "foo";
  std::string cfg = WriteConfig(j);
  std::ostringstream log;
  int rc = cmd_audit(cfg, (dir_ / "out").string(), 1, nullptr, log);
  EXPECT_EQ(rc, kExitConfigError);
  EXPECT_NE(log.str().find("mechanism"), std::string::npos);
  EXPECT_NE(log.str().find("foo"), std::string::npos);
}

TEST_F(CliTest, UnknownAttackRejected) {
  nlohmann::ordered_json j = MinimalConfig();
  j["attack"] = "bar";
  std::string cfg = WriteConfig(j);
  std::ostringstream log;
  int rc = cmd_audit(cfg, (dir_ / "out").string(), 1, nullptr, log);
  EXPECT_EQ(rc, kExitConfigError);
  EXPECT_NE(log.str().find("attack"), std::string::npos);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  std::string cfg = WriteConfig(MinimalConfig());
  std::ostringstream log;
  ASSERT_EQ(cmd_audit(cfg, (dir_ / "o1").string(), 1, nullptr, log), kExitOk);
  ASSERT_EQ(cmd_audit(cfg, (dir_ / "o2").string(), 3, nullptr, log), kExitOk);
  EXPECT_EQ(ReadFile((dir_ / "o1" / "report.json").string()),
            ReadFile((dir_ / "o2" / "report.json").string()));
  EXPECT_EQ(ReadFile((dir_ / "o1" / "scores.csv").string()),
            ReadFile((dir_ / "o2" / "scores.csv").string()));
}

TEST_F(CliTest, SweepWritesPerEpsilonManifestsAndSummary) {
  nlohmann::ordered_json j = MinimalConfig();
  j["epsilon_list"] = {0.5, 1.0, 2.0};
  std::string cfg = WriteConfig(j);
  std::string out = (dir_ / "sweep").string();
  std::vector<RunManifest> manifests;
  std::ostringstream log;
  int rc = cmd_sweep(cfg, out, 1, &manifests, log);
  EXPECT_EQ(rc, kExitOk);
  EXPECT_EQ(manifests.size(), 3u);
  std::string summary = ReadFile(out + "/summary.csv");
  EXPECT_NE(summary.find("epsilon,eps_emp,fold_stddev,verdict"),
            std::string::npos);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 4);  // header+3
  for (const RunManifest& m : manifests) {
    EXPECT_TRUE(fs::exists(m.report_path));
  }
}

TEST_F(CliTest, SweepRejectsEmptyEpsilonList) {
  nlohmann::ordered_json j = MinimalConfig();
  j["epsilon_list"] = nlohmann::json::array();
  std::string cfg = WriteConfig(j);
  std::ostringstream log;
  EXPECT_EQ(cmd_sweep(cfg, (dir_ / "out").string(), 1, nullptr, log),
            kExitConfigError);
}

TEST_F(CliTest, MissingConfigFileIsAConfigError) {
  std::ostringstream log;
  EXPECT_EQ(cmd_audit((dir_ / "nope.json").string(), (dir_ / "o").string(), 1,
                      nullptr, log),
            kExitConfigError);
}

TEST_F(CliTest, MiniMiaTargetWritesCandidateTable) {
  // Average-case dataset next to the config; target picked by mini attacks.
  auto schema = std::make_shared<const Schema>(Schema({
      {"a", {"a0", "a1"}},
      {"b", {"b0", "b1"}},
      {"c", {"c0", "c1"}},
  }));
  Rng rng(5);
  std::vector<Record> rows;
  for (int i = 0; i < 12; ++i) {
    Record r;
    for (std::size_t a = 0; a < 3; ++a) {
      r.values.push_back(
          static_cast<std::int32_t>(rng.uniform_index(2)));
    }
    rows.push_back(r);
  }
  save_dataset_csv(Dataset(schema, rows), (dir_ / "data.csv").string());

  nlohmann::ordered_json j = MinimalConfig();
  j["pair"] = {{"source", "dataset"},
               {"variant", "edit"},
               {"path", "data.csv"},
               {"target", {{"mini_mia", {{"v", 3}, {"reps", 4}}}}}};
  j["n_models"] = 20;
  std::string cfg = WriteConfig(j);
  std::string out = (dir_ / "mini").string();
  std::ostringstream log;
  ASSERT_EQ(cmd_audit(cfg, out, 1, nullptr, log), kExitOk);
  std::string table = ReadFile(out + "/candidates.csv");
  EXPECT_NE(table.find("rank,rarity,auc"), std::string::npos);
}

TEST_F(CliTest, PersistedScoresReproduceTheEstimate) {
  // Estimation replays from scores.csv without refitting any model.
  std::string cfg = WriteConfig(MinimalConfig());
  std::string out = (dir_ / "replay").string();
  std::ostringstream log;
  ASSERT_EQ(cmd_audit(cfg, out, 1, nullptr, log), kExitOk);
  nlohmann::json report =
      nlohmann::json::parse(ReadFile(out + "/report.json"));
  ScoreSet scores = load_scores_csv(out + "/scores.csv");
  double report_tau = EpsilonEstimate::tau_from_json(report["estimate"]["tau"]);
  EpsilonEstimate est = audit(scores.subset(Split::kTest), report_tau, 0.0,
                              0.95, Method::kEpsDeltaRegion);
  EXPECT_DOUBLE_EQ(est.eps_emp, report["estimate"]["eps_emp"].get<double>());
  double tau = select_threshold(scores.subset(Split::kThreshold), 0.0, 0.95,
                                Method::kEpsDeltaRegion);
  EXPECT_DOUBLE_EQ(tau, report_tau);
}

TEST(Verdict, FollowsTheStddevRule) {
  AuditReport r;
  r.estimate.eps_emp = 2.5;
  r.estimate.max_auditable_eps = 4.0;
  r.fold_stddev = 0.3;
  EXPECT_EQ(decide_verdict(r, 1.0), Verdict::kViolationDetected);
  EXPECT_EQ(decide_verdict(r, 2.4), Verdict::kNoViolationDetected);
  // Saturated at the ceiling without clearing the claim: inconclusive.
  r.estimate.eps_emp = 4.0;
  r.fold_stddev = 0.5;
  EXPECT_EQ(decide_verdict(r, 4.2), Verdict::kInconclusive);
  // Saturated but still a violation: the violation rule wins.
  EXPECT_EQ(decide_verdict(r, 1.0), Verdict::kViolationDetected);
}

}  // namespace
}  // namespace dpaudit

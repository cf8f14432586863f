// Copyright 2026 The CascadeLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include "json.hpp"
#include <string>

#include "cascadelab/campaign.h"
#include "test_util.h"

namespace cascadelab {
namespace {

namespace fs = std::filesystem;
using testing::ReadFileText;
using testing::ScenarioPath;
using testing::ScratchDir;

CampaignConfig Config(const std::string& scenario, const std::string& dir) {
  CampaignConfig c;
  c.scenario_path = ScenarioPath(scenario);
  c.output_dir = ScratchDir(dir).string();
  return c;
}

std::map<std::string, std::string> Snapshot(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    out[e.path().filename().string()] = ReadFileText(e.path());
  }
  return out;
}

nlohmann::json Json(const std::string& dir, const std::string& name) {
  return nlohmann::json::parse(ReadFileText(fs::path(dir) / name));
}

TEST(Campaign, ProfileWritesFiveRunsPerTest) {
  auto c = Config("region-retry", "profile");
  ProfileSummary p = CmdProfile(c);
  EXPECT_EQ(p.tests, 3u);
  EXPECT_EQ(p.traces, 15u);
  for (const char* f : {"profile.trace", "coverage.json", "reachability.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / f)) << f;
  }
  auto reach = Json(c.output_dir, "reachability.json");
  EXPECT_EQ(reach["faults"]["can_place_favored"], nlohmann::json({"t2", "t3"}));
}

TEST(Campaign, RegionRetryFindsPlantedCycle) {
  auto c = Config("region-retry", "region");
  DetectSummary d = CmdCampaign(c);
  EXPECT_EQ(d.cycle_clusters, 1u);
  EXPECT_TRUE(d.planted_found);
  EXPECT_EQ(CampaignExitCode(d), 0);
  auto report = Json(c.output_dir, "report.json");
  EXPECT_EQ(report["format"], "cascadelab-report v1");
  EXPECT_EQ(report["budget"]["total"].get<int64_t>(), 4 * report["fault_points"].get<int64_t>());
  int64_t spent = 0;
  for (const auto& s : report["budget"]["spent"]) spent += s.get<int64_t>();
  EXPECT_EQ(spent + report["budget"]["unspent"].get<int64_t>(),
            report["budget"]["total"].get<int64_t>());
  EXPECT_EQ(report["experiments"].get<int64_t>(), spent);
  EXPECT_NE(ReadFileText(fs::path(c.output_dir) / "report.txt").find("cycle"),
            std::string::npos);
}

TEST(Campaign, RerunIsByteIdentical) {
  auto a = Config("shard-redistribution", "rerun-a");
  auto b = Config("shard-redistribution", "rerun-b");
  b.workers = 4;
  CmdCampaign(a);
  CmdCampaign(b);
  EXPECT_EQ(Snapshot(a.output_dir), Snapshot(b.output_dir));
  auto first = Snapshot(a.output_dir);
  CmdCampaign(a);
  EXPECT_EQ(Snapshot(a.output_dir), first);
}

TEST(Campaign, SeedChangesSchedule) {
  auto a = Config("shard-redistribution", "seed-a");
  auto b = Config("shard-redistribution", "seed-b");
  bool differs = false;
  for (uint64_t s = 2; s < 10 && !differs; ++s) {
    b.seed = s;
    CmdCampaign(a);
    CmdCampaign(b);
    differs = ReadFileText(fs::path(a.output_dir) / "phase2.schedule.json") !=
              ReadFileText(fs::path(b.output_dir) / "phase2.schedule.json");
  }
  EXPECT_TRUE(differs);
}

TEST(Campaign, ResumesFromIntermediateArtifacts) {
  auto c = Config("region-retry", "resume");
  CmdCampaign(c);
  auto full = Snapshot(c.output_dir);
  for (const auto& [name, text] : full) {
    if (name.rfind("phase2", 0) == 0 || name.rfind("phase3", 0) == 0 ||
        name.rfind("report", 0) == 0) {
      fs::remove(fs::path(c.output_dir) / name);
    }
  }
  CmdFca(c, 1);
  for (int k = 2; k <= 3; ++k) {
    CmdSchedule(c, k);
    CmdInject(c, k);
    CmdFca(c, k);
  }
  CmdDetect(c);
  EXPECT_EQ(Snapshot(c.output_dir), full);
}

TEST(Campaign, StageNeedsEarlierArtifact) {
  auto c = Config("region-retry", "missing");
  try {
    CmdSchedule(c, 1);
    FAIL();
  } catch (const CampaignError& e) {
    EXPECT_EQ(e.stage(), "schedule");
    EXPECT_NE(std::string(e.what()).find("missing artifact"), std::string::npos);
  }
  CmdProfile(c);
  CmdSchedule(c, 1);
  EXPECT_THROW(CmdSchedule(c, 3), CampaignError);
}

TEST(Campaign, RejectsArtifactVersionMismatch) {
  auto c = Config("region-retry", "version");
  CmdCampaign(c);
  auto path = fs::path(c.output_dir) / "clusters.json";
  auto j = nlohmann::json::parse(ReadFileText(path));
  j["format"] = "cascadelab-clusters v2";
  std::ofstream(path) << j.dump();
  try {
    CmdDetect(c);
    FAIL();
  } catch (const CampaignError& e) {
    EXPECT_EQ(e.stage(), "detect");
    EXPECT_NE(std::string(e.what()).find("clusters.json"), std::string::npos);
  }
  std::ofstream(fs::path(c.output_dir) / "phase1.edges") << "cascadelab-edges v9\n";
  EXPECT_THROW(CmdDetect(c), CampaignError);
}

TEST(Campaign, NoFaultsExitsOne) {
  auto c = Config("no-fault", "nofault");
  DetectSummary d = CmdCampaign(c);
  EXPECT_EQ(d.cycles, 0u);
  EXPECT_EQ(CampaignExitCode(d), 1);
  auto report = Json(c.output_dir, "report.json");
  EXPECT_EQ(report["fault_points"], 0);
  EXPECT_TRUE(report["cycle_clusters"].empty());
}

TEST(Campaign, NoTestsWarns) {
  auto c = Config("minimal", "minimal");
  ::testing::internal::CaptureStderr();
  DetectSummary d = CmdCampaign(c);
  std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("no tests"), std::string::npos);
  EXPECT_EQ(CampaignExitCode(d), 1);
}

TEST(Campaign, BadScenarioReportsStage) {
  auto c = Config("region-retry", "bad");
  c.scenario_path = (fs::path(c.output_dir) / "broken.scn").string();
  std::ofstream(c.scenario_path) << "cascadelab-scenario v1\nscenario s\ncomponent {\n";
  try {
    CmdProfile(c);
    FAIL();
  } catch (const CampaignError& e) {
    EXPECT_EQ(e.stage(), "profile");
  }
  c.scenario_path = "/nonexistent/x.scn";
  EXPECT_THROW(CmdProfile(c), CampaignError);
}

TEST(CampaignConfig, ValidateNamesField) {
  auto expect_bad = [](CampaignConfig c, const std::string& field) {
    try {
      c.Validate();
      ADD_FAILURE() << field;
    } catch (const CampaignError& e) {
      EXPECT_EQ(e.stage(), "config");
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  CampaignConfig ok;
  ok.scenario_path = "x.scn";
  EXPECT_NO_THROW(ok.Validate());
  CampaignConfig c = ok;
  c.budget_multiplier = 0;
  expect_bad(c, "budget-multiplier");
  c = ok;
  c.epsilon = 0;
  expect_bad(c, "epsilon");
  c = ok;
  c.tau = 1.5;
  expect_bad(c, "tau");
  c = ok;
  c.p_value = 1;
  expect_bad(c, "p-value");
  c = ok;
  c.delay_values = {100, 100};
  expect_bad(c, "delay-values");
  c = ok;
  c.delay_values = {};
  expect_bad(c, "delay-values");
  c = ok;
  c.timeout_max = 5;
  expect_bad(c, "timeout");
  c = ok;
  c.beam_size = 0;
  expect_bad(c, "beam-size");
  c = ok;
  c.max_depth = 0;
  expect_bad(c, "max-depth");
  c = ok;
  c.workers = 0;
  expect_bad(c, "workers");
  c = ok;
  c.scenario_path.clear();
  EXPECT_THROW(c.Validate(), CampaignError);
}

TEST(Baseline, MissesRegionRetryAndIbrCycles) {
  for (const char* s : {"region-retry", "ibr-retry"}) {
    auto c = Config(s, std::string("baseline-") + s);
    BaselineSummary b = CmdBaseline(c);
    EXPECT_TRUE(b.detected.empty()) << s;
    EXPECT_FALSE(b.planted_found) << s;
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "baseline.json"));
  }
}

TEST(Baseline, CatchesDirectSelfAmplification) {
  auto c = Config("self-loop", "baseline-self");
  BaselineSummary b = CmdBaseline(c);
  EXPECT_EQ(b.detected, (std::vector<std::string>{"apply_batch"}));
  EXPECT_TRUE(b.planted_found);
}

TEST(Campaign, CallerContextSeparatesTests) {
  auto split = Config("caller-split", "split");
  auto merged = Config("caller-merged", "merged");
  DetectSummary s = CmdCampaign(split);
  DetectSummary m = CmdCampaign(merged);
  EXPECT_EQ(s.cycles, 0u);
  EXPECT_EQ(CampaignExitCode(s), 1);
  EXPECT_EQ(m.cycle_clusters, 1u);
  EXPECT_TRUE(m.planted_found);
}

}  // namespace
}  // namespace cascadelab

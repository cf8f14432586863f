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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cascadelab/sim.h"

namespace cascadelab {

inline constexpr std::string_view kReportHeader = "cascadelab-report v1";

struct CampaignConfig {
  std::string scenario_path;
  uint64_t seed = 1;
  int64_t budget_multiplier = 4;
  double epsilon = 0.01;
  double tau = 0.5;
  double p_value = 0.1;
  std::vector<int64_t> delay_values = DefaultDelayValues();
  int64_t timeout_min = 10000;
  int64_t timeout_max = 20000;
  size_t beam_size = 100000;
  std::optional<size_t> max_delay_injections;
  size_t max_depth = 16;
  std::string output_dir = "cascadelab-out";
  size_t workers = 1;
  bool retrain_before_detect = true;

  // Throws CampaignError naming the offending field.
  void Validate() const;
};

class CampaignError : public std::runtime_error {
 public:
  CampaignError(const std::string& stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ProfileSummary {
  size_t tests = 0;
  size_t traces = 0;
};

struct DetectSummary {
  size_t cycles = 0;
  size_t cycle_clusters = 0;
  bool planted_found = false;
};

struct BaselineSummary {
  std::vector<std::string> detected;
  bool planted_found = false;
};

ProfileSummary CmdProfile(const CampaignConfig& config);
size_t CmdSchedule(const CampaignConfig& config, int phase);
size_t CmdInject(const CampaignConfig& config, int phase);
size_t CmdFca(const CampaignConfig& config, int phase);
DetectSummary CmdDetect(const CampaignConfig& config);
// All stages in order; returns the detection summary.
DetectSummary CmdCampaign(const CampaignConfig& config);
BaselineSummary CmdBaseline(const CampaignConfig& config);

// Exit code for a finished campaign: 0 with cycles, 1 without.
int CampaignExitCode(const DetectSummary& summary);

}  // namespace cascadelab

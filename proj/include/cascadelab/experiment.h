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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cascadelab/alloc.h"
#include "cascadelab/fca.h"
#include "cascadelab/scenario.h"
#include "cascadelab/sim.h"

namespace cascadelab {

// One plan per delay value for loops; a single plan otherwise.
std::vector<InjectionPlan> PlansFor(const FaultPoint& fault,
                                    const std::vector<int64_t>& delay_values);

// Five runs per plan, plans in order.
std::vector<RunTrace> RunInjection(const Scenario& s, const TestWorkload& t,
                                   const FaultPoint& fault,
                                   const std::vector<int64_t>& delay_values,
                                   uint64_t base_seed);

std::vector<RunTrace> RunProfiles(const Scenario& s, uint64_t base_seed);

// Diffs each plan's runs against the test's profile runs and merges them.
ExperimentRecord AnalyzeExperiment(const ScheduledExperiment& exp,
                                   const std::vector<RunTrace>& profile,
                                   const std::vector<RunTrace>& injection,
                                   const std::vector<FaultPoint>& faults,
                                   const DiffOptions& options);

// Profile traces of one test.
std::vector<RunTrace> ProfileOf(const std::vector<RunTrace>& profiles,
                                const std::string& test);

// Union of profile coverage sizes per test.
std::map<std::string, int64_t> CoverageSizes(const std::vector<RunTrace>& profiles);

struct BaselineResult {
  std::set<std::string> detected;
  int64_t experiments = 0;
};

// Injects every fault once per reaching test and keeps those that cause
// themselves.
BaselineResult NaiveBaseline(const Scenario& s, const std::vector<FaultPoint>& faults,
                             const std::vector<int64_t>& delay_values,
                             uint64_t base_seed, double p_threshold);

// Clamps every integer config value whose key mentions "timeout".
Scenario ClampTimeouts(const Scenario& s, int64_t lo, int64_t hi);

}  // namespace cascadelab

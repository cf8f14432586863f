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
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascadelab/scenario.h"

namespace cascadelab {

enum class InjectionMode { kNone, kOneShotException, kDelay, kNegate };

std::string InjectionModeName(InjectionMode mode);
InjectionMode ParseInjectionMode(const std::string& name);

// Default per-iteration delays in virtual ms.
inline const std::vector<int64_t>& DefaultDelayValues() {
  static const std::vector<int64_t> kValues = {100,  250,  500, 1000,
                                               2000, 4000, 8000};
  return kValues;
}

struct InjectionPlan {
  std::optional<std::string> target;  // Unset for profile runs.
  InjectionMode mode = InjectionMode::kNone;
  int64_t delay_ms = 0;

  static InjectionPlan Profile() { return {}; }
  static InjectionPlan For(const FaultPoint& fault, int64_t delay_ms = 0);

  bool IsProfile() const { return !target.has_value(); }
  bool operator==(const InjectionPlan& o) const {
    return target == o.target && mode == o.mode && delay_ms == o.delay_ms;
  }
};

struct BranchOutcome {
  std::string branch_id;
  bool taken = false;

  bool operator==(const BranchOutcome& o) const {
    return branch_id == o.branch_id && taken == o.taken;
  }
  bool operator<(const BranchOutcome& o) const {
    return branch_id != o.branch_id ? branch_id < o.branch_id
                                    : taken < o.taken;
  }
};

struct StitchContext {
  // Call-site statement ids, closest caller first. At most two entries.
  std::vector<std::string> call_stack;
  std::vector<BranchOutcome> branch_trace;

  bool operator==(const StitchContext& o) const {
    return call_stack == o.call_stack && branch_trace == o.branch_trace;
  }
  bool operator!=(const StitchContext& o) const { return !(*this == o); }
  bool operator<(const StitchContext& o) const {
    if (call_stack != o.call_stack) return call_stack < o.call_stack;
    return branch_trace < o.branch_trace;
  }
};

std::string BranchTraceToString(const std::vector<BranchOutcome>& trace);
std::vector<BranchOutcome> BranchTraceFromString(const std::string& text);

struct FaultEvent {
  std::string fault_id;
  std::string exception;  // Empty for detector errors.
  StitchContext context;
  int64_t time = 0;
  bool injected = false;
};

struct LoopRecord {
  int64_t count = 0;
  // Distinct per-iteration contexts in first-seen order.
  std::vector<StitchContext> contexts;
};

struct RunTrace {
  std::string run_id;
  std::string test;
  InjectionPlan injection;
  uint64_t seed = 0;
  std::vector<FaultEvent> fault_events;
  std::map<std::string, LoopRecord> loop_counts;
  std::set<std::string> coverage;
  int64_t wall = 0;
  bool target_reached = false;
  bool exceeded_duration = false;
  bool step_limit_hit = false;
};

struct NoiseModel {
  uint64_t seed = 0;
  // Bound on the extra virtual ms added to each work statement.
  int64_t work_jitter_ms = 0;
  // Per loop: bound on the symmetric jitter applied to the iteration bound.
  std::map<std::string, int64_t> iteration_jitter;

  static NoiseModel ForScenario(const Scenario& s, uint64_t seed);
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string MakeRunId(const std::string& test, const InjectionPlan& plan,
                      int repetition);

RunTrace Execute(const Scenario& s, const TestWorkload& t,
                 const InjectionPlan& plan, const NoiseModel& noise);

inline constexpr int kRepetitions = 5;

std::vector<RunTrace> RunRepeated(const Scenario& s, const TestWorkload& t,
                                  const InjectionPlan& plan,
                                  uint64_t base_seed);

// Fault id -> tests whose profile coverage includes one of its anchors.
std::map<std::string, std::set<std::string>> BuildReachability(
    const Scenario& s, const std::vector<FaultPoint>& faults,
    const std::vector<RunTrace>& profile_traces);

}  // namespace cascadelab

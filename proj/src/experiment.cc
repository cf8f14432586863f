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

#include "cascadelab/experiment.h"

#include <algorithm>

namespace cascadelab {

std::vector<InjectionPlan> PlansFor(const FaultPoint& fault,
                                    const std::vector<int64_t>& delay_values) {
  if (fault.kind != FaultKind::kLoopDelay) return {InjectionPlan::For(fault)};
  std::vector<InjectionPlan> plans;
  for (int64_t d : delay_values) plans.push_back(InjectionPlan::For(fault, d));
  return plans;
}

std::vector<RunTrace> RunInjection(const Scenario& s, const TestWorkload& t,
                                   const FaultPoint& fault,
                                   const std::vector<int64_t>& delay_values,
                                   uint64_t base_seed) {
  std::vector<RunTrace> out;
  for (const auto& plan : PlansFor(fault, delay_values)) {
    auto runs = RunRepeated(s, t, plan, base_seed);
    out.insert(out.end(), std::make_move_iterator(runs.begin()),
               std::make_move_iterator(runs.end()));
  }
  return out;
}

std::vector<RunTrace> RunProfiles(const Scenario& s, uint64_t base_seed) {
  std::vector<RunTrace> out;
  for (const auto& t : s.tests) {
    auto runs = RunRepeated(s, t, InjectionPlan::Profile(), base_seed);
    out.insert(out.end(), std::make_move_iterator(runs.begin()),
               std::make_move_iterator(runs.end()));
  }
  return out;
}

std::vector<RunTrace> ProfileOf(const std::vector<RunTrace>& profiles,
                                const std::string& test) {
  std::vector<RunTrace> out;
  for (const auto& t : profiles) {
    if (t.test == test) out.push_back(t);
  }
  return out;
}

std::map<std::string, int64_t> CoverageSizes(const std::vector<RunTrace>& profiles) {
  std::map<std::string, std::set<std::string>> cov;
  for (const auto& t : profiles) cov[t.test].insert(t.coverage.begin(), t.coverage.end());
  std::map<std::string, int64_t> out;
  for (const auto& [test, ids] : cov) out[test] = static_cast<int64_t>(ids.size());
  return out;
}

ExperimentRecord AnalyzeExperiment(const ScheduledExperiment& exp,
                                   const std::vector<RunTrace>& profile,
                                   const std::vector<RunTrace>& injection,
                                   const std::vector<FaultPoint>& faults,
                                   const DiffOptions& options) {
  ExperimentRecord rec;
  rec.fault = exp.fault;
  rec.test = exp.test;
  rec.phase = exp.phase;
  std::vector<std::vector<RunTrace>> groups;
  for (const auto& t : injection) {
    if (groups.empty() || !(groups.back().front().injection == t.injection)) {
      groups.emplace_back();
    }
    groups.back().push_back(t);
  }
  for (const auto& g : groups) {
    rec.per_value.push_back(DiffRuns(profile, g, faults, options));
  }
  if (rec.per_value.empty()) {
    throw FcaError("experiment " + exp.fault + "@" + exp.test + " has no runs");
  }
  rec.report = MergeReports(rec.per_value);
  return rec;
}

BaselineResult NaiveBaseline(const Scenario& s, const std::vector<FaultPoint>& faults,
                             const std::vector<int64_t>& delay_values,
                             uint64_t base_seed, double p_threshold) {
  BaselineResult result;
  auto profiles = RunProfiles(s, base_seed);
  auto reach = BuildReachability(s, faults, profiles);
  DiffOptions options;
  options.p_threshold = p_threshold;
  options.keep_self = true;
  for (const auto& f : faults) {
    for (const auto& test : reach[f.id]) {
      const TestWorkload* t = s.FindTest(test);
      auto runs = RunInjection(s, *t, f, delay_values, base_seed);
      ++result.experiments;
      ExperimentRecord rec = AnalyzeExperiment({f.id, test, 0, ""}, ProfileOf(profiles, test),
                                               runs, faults, options);
      if (rec.report.Contains(f.id)) {
        result.detected.insert(f.id);
        break;
      }
    }
  }
  return result;
}

Scenario ClampTimeouts(const Scenario& s, int64_t lo, int64_t hi) {
  Scenario out = s;
  auto clamp = [&](std::map<std::string, Value>& values) {
    for (auto& [key, value] : values) {
      if (key.find("timeout") == std::string::npos) continue;
      if (auto* i = std::get_if<int64_t>(&value)) *i = std::clamp(*i, lo, hi);
    }
  };
  clamp(out.config.values);
  for (auto& t : out.tests) clamp(t.config_overrides);
  return out;
}

}  // namespace cascadelab

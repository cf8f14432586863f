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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cascadelab/fault_points.h"
#include "cascadelab/fca.h"
#include "cascadelab/scenario_parser.h"
#include "oracles.h"
#include "test_util.h"

namespace cascadelab {
namespace {

using testing::Ctx;
using testing::LoadBundled;

TEST(TTest, ZeroVarianceConventions) {
  EXPECT_EQ(TTestOneSided({5, 5, 5}, {5, 5, 5}), 0.5);
  EXPECT_EQ(TTestOneSided({5, 5, 5}, {7, 7, 7}), 0.0);
  EXPECT_EQ(TTestOneSided({5, 5, 5}, {3, 3, 3}), 1.0);
}

TEST(TTest, ClearIncreaseIsSignificant) {
  EXPECT_LT(TTestOneSided({10, 10, 11, 10, 10}, {30, 29, 31, 30, 30}), 0.001);
}

TEST(TTest, NoiseIsNotSignificant) {
  EXPECT_GE(TTestOneSided({10, 10, 11, 10, 10}, {10, 11, 10, 10, 9}), 0.1);
}

TEST(TTest, MatchesClosedFormEvenDf) {
  const std::vector<std::pair<std::vector<int64_t>, std::vector<int64_t>>> cases = {
      {{10, 10, 11, 10, 10}, {11, 12, 10, 11, 12}},  // df 8
      {{1, 2, 3}, {2, 3, 5}},                        // df 4
      {{4, 6}, {5, 9}},                              // df 2
      {{7, 8, 9, 7, 8, 9}, {8, 9, 9, 8, 10, 7}},     // df 10
      {{10, 12, 11, 10, 13}, {9, 10, 11, 10, 10}},   // df 8, decrease
  };
  for (const auto& [a, b] : cases) {
    EXPECT_NEAR(TTestOneSided(a, b), oracle::TTestP(a, b), 1e-9);
  }
}

TEST(TTest, MonotoneInInjectionShift) {
  std::vector<int64_t> base = {10, 11, 9, 10, 10};
  double prev = 1.0;
  for (int shift = 0; shift <= 6; ++shift) {
    std::vector<int64_t> inj = base;
    for (auto& x : inj) x += shift;
    double p = TTestOneSided(base, inj);
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(TTest, NeedsTwoSamples) {
  EXPECT_THROW(TTestOneSided({1}, {1, 2}), FcaError);
}

// Five profile and five injection runs with caller-chosen events.
struct Runs {
  std::vector<RunTrace> profile;
  std::vector<RunTrace> injection;
};

Runs MakeRuns(const std::string& test, const InjectionPlan& plan) {
  Runs r;
  for (int k = 0; k < 5; ++k) {
    RunTrace p;
    p.test = test;
    p.run_id = MakeRunId(test, InjectionPlan::Profile(), k);
    r.profile.push_back(p);
    RunTrace q;
    q.test = test;
    q.injection = plan;
    q.target_reached = true;
    q.run_id = MakeRunId(test, plan, k);
    r.injection.push_back(q);
  }
  return r;
}

FaultPoint Fault(const std::string& id, FaultKind kind) {
  FaultPoint f;
  f.id = id;
  f.kind = kind;
  return f;
}

void AddEvent(RunTrace& t, const std::string& id, bool injected = false,
              StitchContext ctx = Ctx({"c.h#1"})) {
  t.fault_events.push_back({id, "IOException", ctx, 0, injected});
}

void SetLoop(std::vector<RunTrace>& runs, const std::string& loop,
             const std::vector<int64_t>& counts) {
  for (size_t k = 0; k < runs.size(); ++k) runs[k].loop_counts[loop].count = counts[k];
}

class DiffRunsTest : public ::testing::Test {
 protected:
  DiffRunsTest() {
    faults_ = {Fault("inj", FaultKind::kException), Fault("e3", FaultKind::kException),
               Fault("e2", FaultKind::kException), Fault("eprof", FaultKind::kException),
               Fault("slow", FaultKind::kLoopDelay), Fault("flat", FaultKind::kLoopDelay)};
    InjectionPlan plan;
    plan.target = "inj";
    plan.mode = InjectionMode::kOneShotException;
    runs_ = MakeRuns("t", plan);
    for (auto& q : runs_.injection) AddEvent(q, "inj", true, Ctx({"c.a#2"}));
    for (int k = 0; k < 3; ++k) AddEvent(runs_.injection[k], "e3", false, Ctx({"c.x#1"}));
    for (int k = 0; k < 2; ++k) AddEvent(runs_.injection[k], "e2");
    for (auto& q : runs_.injection) AddEvent(q, "eprof");
    AddEvent(runs_.profile[4], "eprof");
    SetLoop(runs_.profile, "slow", {10, 10, 11, 10, 10});
    SetLoop(runs_.injection, "slow", {30, 29, 31, 30, 30});
    SetLoop(runs_.profile, "flat", {10, 10, 11, 10, 10});
    SetLoop(runs_.injection, "flat", {10, 11, 10, 10, 9});
    runs_.injection[0].loop_counts["slow"].contexts = {Ctx({"c.s#1"})};
    runs_.injection[1].loop_counts["slow"].contexts = {Ctx({"c.s#1"}), Ctx({"c.s#2"})};
  }

  std::vector<FaultPoint> faults_;
  Runs runs_;
};

TEST_F(DiffRunsTest, AppliesTraceAndIterationRules) {
  InterferenceReport r = DiffRuns(runs_.profile, runs_.injection, faults_);
  EXPECT_EQ(r.FaultIds(), (std::vector<std::string>{"e3", "slow"}));
  EXPECT_EQ(r.injected, "inj");
  EXPECT_EQ(r.test, "t");
  EXPECT_TRUE(r.target_reached);
  ASSERT_EQ(r.injected_contexts.size(), 1u);
  EXPECT_EQ(r.injected_contexts[0], Ctx({"c.a#2"}));

  const auto& e3 = r.additional[0];
  ASSERT_TRUE(e3.trace);
  EXPECT_EQ(e3.trace->injection_runs, 3);
  EXPECT_EQ(e3.trace->profile_runs, 0);
  EXPECT_EQ(e3.trace->total_runs, 5);
  EXPECT_EQ(e3.contexts, (std::vector<StitchContext>{Ctx({"c.x#1"})}));

  const auto& slow = r.additional[1];
  ASSERT_TRUE(slow.iter);
  EXPECT_LT(slow.iter->p_value, 0.001);
  EXPECT_EQ(slow.contexts, (std::vector<StitchContext>{Ctx({"c.s#1"}), Ctx({"c.s#2"})}));
}

TEST_F(DiffRunsTest, KeepSelfReportsInjectedLoop) {
  faults_[0] = Fault("inj", FaultKind::kLoopDelay);
  InjectionPlan plan;
  plan.target = "inj";
  plan.mode = InjectionMode::kDelay;
  plan.delay_ms = 500;
  Runs runs = MakeRuns("t", plan);
  SetLoop(runs.profile, "inj", {4, 4, 5, 4, 4});
  SetLoop(runs.injection, "inj", {9, 9, 9, 8, 9});
  EXPECT_FALSE(DiffRuns(runs.profile, runs.injection, faults_).Contains("inj"));
  DiffOptions keep;
  keep.keep_self = true;
  InterferenceReport r = DiffRuns(runs.profile, runs.injection, faults_, keep);
  EXPECT_TRUE(r.Contains("inj"));
  EXPECT_EQ(r.delay_values, (std::vector<int64_t>{500}));
  EXPECT_EQ(r.additional[0].delay_value, 500);
}

TEST_F(DiffRunsTest, ThresholdIsConfigurable) {
  DiffOptions loose;
  loose.min_injection_runs = 2;
  InterferenceReport r = DiffRuns(runs_.profile, runs_.injection, faults_, loose);
  EXPECT_TRUE(r.Contains("e2"));
  EXPECT_FALSE(r.Contains("eprof"));
}

TEST_F(DiffRunsTest, RejectsMismatchedTests) {
  runs_.injection[2].test = "other";
  EXPECT_THROW(DiffRuns(runs_.profile, runs_.injection, faults_), FcaError);
}

TEST_F(DiffRunsTest, RejectsNonProfileBaseline) {
  runs_.profile[0].injection = runs_.injection[0].injection;
  EXPECT_THROW(DiffRuns(runs_.profile, runs_.injection, faults_), FcaError);
}

TEST_F(DiffRunsTest, RejectsEmptySides) {
  EXPECT_THROW(DiffRuns({}, runs_.injection, faults_), FcaError);
  EXPECT_THROW(DiffRuns(runs_.profile, {}, faults_), FcaError);
}

InterferenceReport DelayReport(const std::string& injected, FaultKind kind,
                               const std::vector<std::string>& slow_loops) {
  InterferenceReport r;
  r.injected = injected;
  r.injected_kind = kind;
  r.test = "t1";
  r.injected_contexts = {Ctx({"w.f#1"})};
  for (const auto& l : slow_loops) {
    AdditionalFault a;
    a.fault_id = l;
    a.kind = FaultKind::kLoopDelay;
    a.contexts = {Ctx({"w.c#" + l})};
    r.additional.push_back(a);
    r.loop_contexts[l] = a.contexts;
  }
  r.loop_contexts["L1"] = {Ctx({"w.c#L1"})};
  r.loop_contexts["L3"] = {Ctx({"w.c#L3"})};
  return r;
}

std::vector<std::string> Keys(const std::vector<CausalEdge>& edges) {
  std::vector<std::string> out;
  for (const auto& e : edges) out.push_back(e.Key());
  return out;
}

TEST(ExpandNested, InnerLoopAddsParentAndSiblingHops) {
  Scenario s = LoadBundled("nested-loops");
  auto edges = ExpandNested(DelayReport("fetch_err", FaultKind::kException, {"L2"}), s.loops);
  EXPECT_EQ(Keys(edges), (std::vector<std::string>{"fetch_err S+(I) L2 @t1",
                                                   "L2 ICFG L1 @t1", "L1 CFG L3 @t1"}));
  for (const auto& e : edges) EXPECT_EQ(e.origin, "fetch_err");
  EXPECT_EQ(edges[1].src_contexts, edges[0].dst_contexts);
  EXPECT_EQ(edges[1].dst_contexts, (std::vector<StitchContext>{Ctx({"w.c#L1"})}));
  EXPECT_EQ(edges[2].src_contexts, edges[1].dst_contexts);
  EXPECT_EQ(edges[2].dst_contexts, (std::vector<StitchContext>{Ctx({"w.c#L3"})}));
}

TEST(ExpandNested, LastChildHasNoSiblingHop) {
  Scenario s = LoadBundled("nested-loops");
  auto edges = ExpandNested(DelayReport("fetch_err", FaultKind::kException, {"L3"}), s.loops);
  EXPECT_EQ(Keys(edges),
            (std::vector<std::string>{"fetch_err S+(I) L3 @t1", "L3 ICFG L1 @t1"}));
}

TEST(ExpandNested, OutermostLoopIsBaseOnly) {
  Scenario s = LoadBundled("nested-loops");
  auto edges = ExpandNested(DelayReport("L2", FaultKind::kLoopDelay, {"L1"}), s.loops);
  EXPECT_EQ(Keys(edges), (std::vector<std::string>{"L2 S+(D) L1 @t1"}));
}

TEST(EdgesFromReport, KindsFollowInjectedAndObserved) {
  EXPECT_EQ(BaseEdgeKind(FaultKind::kLoopDelay, FaultKind::kException), EdgeKind::kExcDelay);
  EXPECT_EQ(BaseEdgeKind(FaultKind::kLoopDelay, FaultKind::kNegation), EdgeKind::kExcDelay);
  EXPECT_EQ(BaseEdgeKind(FaultKind::kLoopDelay, FaultKind::kLoopDelay), EdgeKind::kSlowDelay);
  EXPECT_EQ(BaseEdgeKind(FaultKind::kException, FaultKind::kException), EdgeKind::kExcInj);
  EXPECT_EQ(BaseEdgeKind(FaultKind::kNegation, FaultKind::kException), EdgeKind::kExcInj);
  EXPECT_EQ(BaseEdgeKind(FaultKind::kNegation, FaultKind::kLoopDelay), EdgeKind::kSlowInj);

  InterferenceReport r = DelayReport("L2", FaultKind::kLoopDelay, {});
  AdditionalFault a;
  a.fault_id = "fetch_err";
  a.kind = FaultKind::kException;
  a.trace = TraceEvidence{4, 0, 5};
  a.contexts = {Ctx({"w.x#1"})};
  a.delay_value = 250;
  r.additional.push_back(a);
  auto edges = EdgesFromReport(r, LoadBundled("nested-loops").loops);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].Key(), "L2 E(D) fetch_err @t1");
  EXPECT_NE(edges[0].evidence.find("4/5"), std::string::npos);
  EXPECT_NE(edges[0].evidence.find("250ms"), std::string::npos);
}

TEST(EdgeKinds, NamesRoundTrip) {
  for (EdgeKind k : {EdgeKind::kExcDelay, EdgeKind::kSlowDelay, EdgeKind::kExcInj,
                     EdgeKind::kSlowInj, EdgeKind::kIcfg, EdgeKind::kCfg}) {
    EXPECT_EQ(ParseEdgeKind(EdgeKindName(k)), k);
    EXPECT_EQ(IsBaseKind(k), k != EdgeKind::kIcfg && k != EdgeKind::kCfg);
  }
  EXPECT_THROW(ParseEdgeKind("X(Y)"), FcaError);
}

TEST(MergeReports, UnionsFaultsAndContexts) {
  InterferenceReport a = DelayReport("L2", FaultKind::kLoopDelay, {"L1"});
  InterferenceReport b = DelayReport("L2", FaultKind::kLoopDelay, {"L1", "L3"});
  a.delay_values = {100};
  b.delay_values = {250};
  b.additional[0].contexts = {Ctx({"w.c#L1b"})};
  InterferenceReport m = MergeReports({a, b});
  EXPECT_EQ(m.FaultIds(), (std::vector<std::string>{"L1", "L3"}));
  EXPECT_EQ(m.delay_values, (std::vector<int64_t>{100, 250}));
  EXPECT_EQ(m.additional[0].contexts,
            (std::vector<StitchContext>{Ctx({"w.c#L1"}), Ctx({"w.c#L1b"})}));
  b.test = "t2";
  EXPECT_THROW(MergeReports({a, b}), FcaError);
  EXPECT_THROW(MergeReports({}), FcaError);
}

TEST(EdgeArchive, RoundTrip) {
  Scenario s = LoadBundled("nested-loops");
  auto edges = ExpandNested(DelayReport("fetch_err", FaultKind::kException, {"L2"}), s.loops);
  edges[0].src_contexts = {Ctx({"a#1", "b#2"}, {{"c.h#3", true}, {"c.h#4", false}})};
  std::ostringstream out;
  WriteEdgeArchive(out, edges);
  EXPECT_EQ(out.str().rfind(std::string(kEdgesHeader) + "\n", 0), 0u);
  std::istringstream in(out.str());
  EXPECT_EQ(ReadEdgeArchive(in), edges);
}

TEST(EdgeArchive, RejectsWrongHeader) {
  std::istringstream in("cascadelab-edges v0\n");
  EXPECT_THROW(ReadEdgeArchive(in), FcaError);
}

TEST(DiffRuns, BundledNestedLoopsFetchError) {
  Scenario s = LoadBundled("nested-loops");
  auto faults = EnumerateFaultPoints(s);
  const auto& t = *s.FindTest("t1");
  auto profile = RunRepeated(s, t, InjectionPlan::Profile(), 1);
  auto inj = RunRepeated(s, t, InjectionPlan::For(*FindFault(faults, "fetch_err")), 1);
  InterferenceReport r = DiffRuns(profile, inj, faults);
  EXPECT_EQ(r.FaultIds(), (std::vector<std::string>{"L2"}));
  EXPECT_EQ(Keys(EdgesFromReport(r, s.loops)),
            (std::vector<std::string>{"fetch_err S+(I) L2 @t1", "L2 ICFG L1 @t1",
                                      "L1 CFG L3 @t1"}));
}

}  // namespace
}  // namespace cascadelab

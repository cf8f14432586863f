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

#include "json.hpp"
#include <sstream>
#include <string>

#include "cascadelab/fault_points.h"
#include "cascadelab/sim.h"
#include "cascadelab/trace_archive.h"
#include "test_util.h"

namespace cascadelab {
namespace {

using testing::LoadBundled;

std::vector<RunTrace> SampleTraces() {
  Scenario s = LoadBundled("region-retry");
  auto faults = EnumerateFaultPoints(s);
  std::vector<RunTrace> out;
  for (const auto& t : s.tests) {
    auto p = RunRepeated(s, t, InjectionPlan::Profile(), 3);
    out.insert(out.end(), p.begin(), p.end());
  }
  for (const char* id : {"deploy_regions", "assign_ioe", "can_place_favored"}) {
    auto q = RunRepeated(s, *s.FindTest("t2"),
                         InjectionPlan::For(*FindFault(faults, id), 500), 3);
    out.insert(out.end(), q.begin(), q.end());
  }
  auto miss = RunRepeated(s, *s.FindTest("t1"),
                          InjectionPlan::For(*FindFault(faults, "can_place_favored")), 3);
  out.insert(out.end(), miss.begin(), miss.end());
  return out;
}

std::vector<RunTrace> RoundTrip(const std::string& text) {
  std::istringstream in(text);
  return ReadTraceArchive(in);
}

TEST(TraceArchive, RoundTripPreservesArchivedFields) {
  auto traces = SampleTraces();
  auto back = RoundTrip(TraceArchiveToString(traces));
  ASSERT_EQ(back.size(), traces.size());
  bool saw_unreached = false;
  for (size_t i = 0; i < traces.size(); ++i) {
    const auto& a = traces[i];
    const auto& b = back[i];
    EXPECT_EQ(a.run_id, b.run_id);
    EXPECT_EQ(a.test, b.test);
    EXPECT_EQ(a.injection, b.injection);
    EXPECT_EQ(a.wall, b.wall);
    EXPECT_EQ(a.target_reached, b.target_reached);
    saw_unreached |= !a.injection.IsProfile() && !a.target_reached;
    EXPECT_EQ(a.exceeded_duration, b.exceeded_duration);
    EXPECT_EQ(a.step_limit_hit, b.step_limit_hit);
    ASSERT_EQ(a.fault_events.size(), b.fault_events.size());
    for (size_t k = 0; k < a.fault_events.size(); ++k) {
      EXPECT_EQ(a.fault_events[k].fault_id, b.fault_events[k].fault_id);
      EXPECT_EQ(a.fault_events[k].context, b.fault_events[k].context);
      EXPECT_EQ(a.fault_events[k].time, b.fault_events[k].time);
      EXPECT_EQ(a.fault_events[k].injected, b.fault_events[k].injected);
    }
    ASSERT_EQ(a.loop_counts.size(), b.loop_counts.size());
    for (const auto& [loop, rec] : a.loop_counts) {
      EXPECT_EQ(rec.count, b.loop_counts.at(loop).count);
      EXPECT_EQ(rec.contexts, b.loop_counts.at(loop).contexts);
    }
  }
  EXPECT_TRUE(saw_unreached);
  EXPECT_EQ(TraceArchiveToString(back), TraceArchiveToString(traces));
}

TEST(TraceArchive, EveryRecordHasTwelveFields) {
  std::istringstream in(TraceArchiveToString(SampleTraces()));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kTraceHeader);
  int records = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.size(), 12u) << line;
    for (const char* key : {"run_id", "test", "injection_target", "injection_mode",
                            "event_kind", "fault_id", "loop_id", "count",
                            "stack_frame_1", "stack_frame_2", "branch_trace",
                            "virtual_time"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    ++records;
  }
  EXPECT_GT(records, 0);
}

TEST(TraceArchive, RejectsMissingOrWrongHeader) {
  std::string body = TraceArchiveToString(SampleTraces());
  std::string rest = body.substr(body.find('\n') + 1);
  EXPECT_THROW(RoundTrip(""), ArchiveError);
  EXPECT_THROW(RoundTrip(rest), ArchiveError);
  EXPECT_THROW(RoundTrip("cascadelab-trace v2\n" + rest), ArchiveError);
}

TEST(TraceArchive, RejectsWrongFieldCount) {
  std::string text = std::string(kTraceHeader) + "\n" +
                     R"({"run_id":"t/profile/r0","test":"t","event_kind":"run-end"})" + "\n";
  try {
    RoundTrip(text);
    FAIL();
  } catch (const ArchiveError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(TraceArchive, RejectsTruncatedRun) {
  std::string body = TraceArchiveToString(SampleTraces());
  std::string cut = body.substr(0, body.rfind("run-end"));
  cut = cut.substr(0, cut.rfind('\n') + 1);
  EXPECT_THROW(RoundTrip(cut), ArchiveError);
}

TEST(TraceArchive, EmptyArchiveIsHeaderOnly) {
  EXPECT_EQ(TraceArchiveToString({}), std::string(kTraceHeader) + "\n");
  EXPECT_TRUE(RoundTrip(std::string(kTraceHeader) + "\n").empty());
}

}  // namespace
}  // namespace cascadelab

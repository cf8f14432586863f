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

#include "cascadelab/trace_archive.h"

#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace cascadelab {

namespace {

using Json = nlohmann::ordered_json;

constexpr int64_t kFlagExceededDuration = 1;
constexpr int64_t kFlagStepLimit = 2;

std::string ModeField(const InjectionPlan& plan) {
  std::string mode = InjectionModeName(plan.mode);
  if (plan.mode == InjectionMode::kDelay) mode += "@" + std::to_string(plan.delay_ms);
  return mode;
}

Json Record(const RunTrace& t, const std::string& kind) {
  Json j;
  j["run_id"] = t.run_id;
  j["test"] = t.test;
  j["injection_target"] = t.injection.target.value_or("");
  j["injection_mode"] = ModeField(t.injection);
  j["event_kind"] = kind;
  j["fault_id"] = "";
  j["loop_id"] = "";
  j["count"] = 0;
  j["stack_frame_1"] = "";
  j["stack_frame_2"] = "";
  j["branch_trace"] = "";
  j["virtual_time"] = 0;
  return j;
}

void PutContext(Json& j, const StitchContext& ctx) {
  if (!ctx.call_stack.empty()) j["stack_frame_1"] = ctx.call_stack[0];
  if (ctx.call_stack.size() > 1) j["stack_frame_2"] = ctx.call_stack[1];
  j["branch_trace"] = BranchTraceToString(ctx.branch_trace);
}

StitchContext GetContext(const Json& j) {
  StitchContext ctx;
  std::string f1 = j.at("stack_frame_1").get<std::string>();
  std::string f2 = j.at("stack_frame_2").get<std::string>();
  if (!f1.empty()) ctx.call_stack.push_back(f1);
  if (!f2.empty()) ctx.call_stack.push_back(f2);
  ctx.branch_trace = BranchTraceFromString(j.at("branch_trace").get<std::string>());
  return ctx;
}

}  // namespace

void WriteTraceArchive(std::ostream& out, const std::vector<RunTrace>& traces) {
  out << kTraceHeader << "\n";
  for (const auto& t : traces) {
    for (const auto& e : t.fault_events) {
      Json j = Record(t, e.injected ? "injected" : "fault");
      j["fault_id"] = e.fault_id;
      PutContext(j, e.context);
      j["virtual_time"] = e.time;
      out << j.dump() << "\n";
    }
    for (const auto& [loop, rec] : t.loop_counts) {
      Json j = Record(t, "loop");
      j["loop_id"] = loop;
      j["count"] = rec.count;
      j["virtual_time"] = t.wall;
      out << j.dump() << "\n";
      for (const auto& ctx : rec.contexts) {
        Json c = Record(t, "loop-context");
        c["loop_id"] = loop;
        PutContext(c, ctx);
        c["virtual_time"] = t.wall;
        out << c.dump() << "\n";
      }
    }
    if (!t.injection.IsProfile() && !t.target_reached) {
      Json j = Record(t, "target-not-reached");
      j["fault_id"] = *t.injection.target;
      j["virtual_time"] = t.wall;
      out << j.dump() << "\n";
    }
    Json end = Record(t, "run-end");
    end["count"] = (t.exceeded_duration ? kFlagExceededDuration : 0) |
                   (t.step_limit_hit ? kFlagStepLimit : 0);
    end["virtual_time"] = t.wall;
    out << end.dump() << "\n";
  }
}

std::string TraceArchiveToString(const std::vector<RunTrace>& traces) {
  std::ostringstream out;
  WriteTraceArchive(out, traces);
  return out.str();
}

std::vector<RunTrace> ReadTraceArchive(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw ArchiveError("trace archive: expected header '" +
                       std::string(kTraceHeader) + "'");
  }
  std::vector<RunTrace> traces;
  RunTrace current;
  bool open = false;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      if (j.size() != 12) throw ArchiveError("wrong field count");
      if (!open) {
        current = RunTrace{};
        current.run_id = j.at("run_id").get<std::string>();
        current.test = j.at("test").get<std::string>();
        std::string target = j.at("injection_target").get<std::string>();
        std::string mode = j.at("injection_mode").get<std::string>();
        if (!target.empty()) current.injection.target = target;
        auto at = mode.find('@');
        current.injection.mode = ParseInjectionMode(mode.substr(0, at));
        if (at != std::string::npos) {
          current.injection.delay_ms = std::stoll(mode.substr(at + 1));
        }
        current.target_reached = !target.empty();
        open = true;
      } else if (j.at("run_id").get<std::string>() != current.run_id) {
        throw ArchiveError("run '" + current.run_id + "' has no run-end");
      }
      std::string kind = j.at("event_kind").get<std::string>();
      if (kind == "fault" || kind == "injected") {
        current.fault_events.push_back({j.at("fault_id").get<std::string>(), "",
                                        GetContext(j),
                                        j.at("virtual_time").get<int64_t>(),
                                        kind == "injected"});
      } else if (kind == "loop") {
        current.loop_counts[j.at("loop_id").get<std::string>()].count =
            j.at("count").get<int64_t>();
      } else if (kind == "loop-context") {
        current.loop_counts[j.at("loop_id").get<std::string>()].contexts.push_back(
            GetContext(j));
      } else if (kind == "target-not-reached") {
        current.target_reached = false;
      } else if (kind == "run-end") {
        int64_t flags = j.at("count").get<int64_t>();
        current.exceeded_duration = flags & kFlagExceededDuration;
        current.step_limit_hit = flags & kFlagStepLimit;
        current.wall = j.at("virtual_time").get<int64_t>();
        traces.push_back(std::move(current));
        open = false;
      } else {
        throw ArchiveError("unknown event kind '" + kind + "'");
      }
    } catch (const ArchiveError& e) {
      throw ArchiveError("trace archive line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ArchiveError("trace archive line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (open) throw ArchiveError("trace archive: truncated run '" + current.run_id + "'");
  return traces;
}

}  // namespace cascadelab

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

#include "cascadelab/fca.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "cascadelab/fault_points.h"
#include "json.hpp"

namespace cascadelab {

double TTestOneSided(const std::vector<int64_t>& profile,
                     const std::vector<int64_t>& injection) {
  if (profile.size() < 2 || injection.size() < 2) {
    throw FcaError("t-test needs at least two samples per side");
  }
  auto mean = [](const std::vector<int64_t>& xs) {
    double sum = 0;
    for (int64_t x : xs) sum += static_cast<double>(x);
    return sum / static_cast<double>(xs.size());
  };
  auto ss = [](const std::vector<int64_t>& xs, double m) {
    double acc = 0;
    for (int64_t x : xs) acc += (x - m) * (x - m);
    return acc;
  };
  const double n1 = static_cast<double>(profile.size());
  const double n2 = static_cast<double>(injection.size());
  const double m1 = mean(profile);
  const double m2 = mean(injection);
  const double df = n1 + n2 - 2;
  const double pooled = (ss(profile, m1) + ss(injection, m2)) / df;
  if (pooled == 0.0) {
    if (m1 == m2) return 0.5;
    return m2 > m1 ? 0.0 : 1.0;
  }
  const double t = (m2 - m1) / std::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
  boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

bool InterferenceReport::Contains(const std::string& fault_id) const {
  for (const auto& a : additional) {
    if (a.fault_id == fault_id) return true;
  }
  return false;
}

std::vector<std::string> InterferenceReport::FaultIds() const {
  std::vector<std::string> ids;
  for (const auto& a : additional) ids.push_back(a.fault_id);
  return ids;
}

namespace {

void AddDistinct(std::vector<StitchContext>& into, const StitchContext& ctx) {
  if (std::find(into.begin(), into.end(), ctx) == into.end()) into.push_back(ctx);
}

}  // namespace

InterferenceReport DiffRuns(const std::vector<RunTrace>& profile,
                            const std::vector<RunTrace>& injection,
                            const std::vector<FaultPoint>& faults,
                            const DiffOptions& options) {
  if (profile.empty() || injection.empty()) {
    throw FcaError("diff needs profile and injection runs");
  }
  const std::string& test = profile.front().test;
  for (const auto* group : {&profile, &injection}) {
    for (const auto& t : *group) {
      if (t.test != test) {
        throw FcaError("mismatched tests '" + test + "' and '" + t.test + "'");
      }
    }
  }
  for (const auto& t : profile) {
    if (!t.injection.IsProfile()) {
      throw FcaError("run '" + t.run_id + "' is not a profile run");
    }
  }
  const InjectionPlan& plan = injection.front().injection;
  for (const auto& t : injection) {
    if (!(t.injection == plan)) {
      throw FcaError("injection runs disagree on the plan");
    }
  }

  InterferenceReport report;
  report.test = test;
  report.injected = plan.target.value_or("");
  if (const FaultPoint* self = FindFault(faults, report.injected)) {
    report.injected_kind = self->kind;
  }
  if (plan.mode == InjectionMode::kDelay) report.delay_values = {plan.delay_ms};

  for (const auto& t : injection) {
    report.target_reached = report.target_reached || t.target_reached;
    for (const auto& [loop, rec] : t.loop_counts) {
      auto& into = report.loop_contexts[loop];
      for (const auto& ctx : rec.contexts) AddDistinct(into, ctx);
    }
  }
  if (plan.mode == InjectionMode::kDelay) {
    auto it = report.loop_contexts.find(report.injected);
    if (it != report.loop_contexts.end()) report.injected_contexts = it->second;
  } else {
    for (const auto& t : injection) {
      for (const auto& e : t.fault_events) {
        if (e.injected && e.fault_id == report.injected) {
          report.injected_contexts.push_back(e.context);
          break;
        }
      }
      if (!report.injected_contexts.empty()) break;
    }
  }

  for (const auto& f : faults) {
    if (f.id == report.injected && !options.keep_self) continue;
    if (f.kind == FaultKind::kLoopDelay) {
      IterEvidence ev;
      for (const auto& t : profile) {
        auto it = t.loop_counts.find(f.id);
        ev.profile.push_back(it == t.loop_counts.end() ? 0 : it->second.count);
      }
      for (const auto& t : injection) {
        auto it = t.loop_counts.find(f.id);
        ev.injection.push_back(it == t.loop_counts.end() ? 0 : it->second.count);
      }
      ev.p_value = TTestOneSided(ev.profile, ev.injection);
      if (ev.p_value < options.p_threshold) {
        AdditionalFault a;
        a.fault_id = f.id;
        a.kind = f.kind;
        a.iter = std::move(ev);
        a.delay_value = plan.delay_ms;
        auto it = report.loop_contexts.find(f.id);
        if (it != report.loop_contexts.end()) a.contexts = it->second;
        report.additional.push_back(std::move(a));
      }
      continue;
    }
    auto occurs = [&](const RunTrace& t) {
      for (const auto& e : t.fault_events) {
        if (!e.injected && e.fault_id == f.id) return &e;
      }
      return static_cast<const FaultEvent*>(nullptr);
    };
    TraceEvidence ev;
    ev.total_runs = static_cast<int>(injection.size());
    const FaultEvent* first = nullptr;
    for (const auto& t : profile) ev.profile_runs += occurs(t) != nullptr;
    for (const auto& t : injection) {
      const FaultEvent* e = occurs(t);
      if (e) {
        ++ev.injection_runs;
        if (!first) first = e;
      }
    }
    if (ev.profile_runs == 0 && ev.injection_runs >= options.min_injection_runs) {
      AdditionalFault a;
      a.fault_id = f.id;
      a.kind = f.kind;
      a.trace = ev;
      a.delay_value = plan.delay_ms;
      a.contexts = {first->context};
      report.additional.push_back(std::move(a));
    }
  }
  return report;
}

InterferenceReport MergeReports(const std::vector<InterferenceReport>& reports) {
  if (reports.empty()) throw FcaError("nothing to merge");
  InterferenceReport merged = reports.front();
  for (size_t i = 1; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.injected != merged.injected || r.test != merged.test) {
      throw FcaError("merging reports of different experiments");
    }
    merged.target_reached = merged.target_reached || r.target_reached;
    merged.delay_values.insert(merged.delay_values.end(), r.delay_values.begin(),
                               r.delay_values.end());
    for (const auto& ctx : r.injected_contexts) AddDistinct(merged.injected_contexts, ctx);
    for (const auto& [loop, ctxs] : r.loop_contexts) {
      auto& into = merged.loop_contexts[loop];
      for (const auto& ctx : ctxs) AddDistinct(into, ctx);
    }
    for (const auto& a : r.additional) {
      auto it = std::find_if(merged.additional.begin(), merged.additional.end(),
                             [&](const AdditionalFault& m) { return m.fault_id == a.fault_id; });
      if (it == merged.additional.end()) {
        merged.additional.push_back(a);
      } else if (a.kind == FaultKind::kLoopDelay) {
        for (const auto& ctx : a.contexts) AddDistinct(it->contexts, ctx);
      }
    }
  }
  return merged;
}

std::string EdgeKindName(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kExcDelay:
      return "E(D)";
    case EdgeKind::kSlowDelay:
      return "S+(D)";
    case EdgeKind::kExcInj:
      return "E(I)";
    case EdgeKind::kSlowInj:
      return "S+(I)";
    case EdgeKind::kIcfg:
      return "ICFG";
    case EdgeKind::kCfg:
      return "CFG";
  }
  return "?";
}

EdgeKind ParseEdgeKind(const std::string& name) {
  for (EdgeKind k : {EdgeKind::kExcDelay, EdgeKind::kSlowDelay, EdgeKind::kExcInj,
                     EdgeKind::kSlowInj, EdgeKind::kIcfg, EdgeKind::kCfg}) {
    if (EdgeKindName(k) == name) return k;
  }
  throw FcaError("unknown edge kind '" + name + "'");
}

bool IsBaseKind(EdgeKind kind) {
  return kind != EdgeKind::kIcfg && kind != EdgeKind::kCfg;
}

bool IsExceptionKind(EdgeKind kind) {
  return kind == EdgeKind::kExcDelay || kind == EdgeKind::kExcInj;
}

bool IsSlowKind(EdgeKind kind) {
  return kind == EdgeKind::kSlowDelay || kind == EdgeKind::kSlowInj;
}

EdgeKind BaseEdgeKind(FaultKind injected, FaultKind observed) {
  bool delay_src = injected == FaultKind::kLoopDelay;
  if (observed == FaultKind::kLoopDelay) {
    return delay_src ? EdgeKind::kSlowDelay : EdgeKind::kSlowInj;
  }
  return delay_src ? EdgeKind::kExcDelay : EdgeKind::kExcInj;
}

bool CausalEdge::operator==(const CausalEdge& o) const {
  return kind == o.kind && src == o.src && dst == o.dst && test == o.test &&
         origin == o.origin && src_contexts == o.src_contexts &&
         dst_contexts == o.dst_contexts && evidence == o.evidence;
}

std::string CausalEdge::Key() const {
  return src + " " + EdgeKindName(kind) + " " + dst + " @" + test;
}

namespace {

std::string FormatP(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", p);
  return buf;
}

std::string JoinInts(const std::vector<int64_t>& xs) {
  std::string out = "[";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out + "]";
}

std::string EvidenceSummary(const AdditionalFault& a) {
  std::string out;
  if (a.trace) {
    out = "trace " + std::to_string(a.trace->injection_runs) + "/" +
          std::to_string(a.trace->total_runs) + " injection runs, " +
          std::to_string(a.trace->profile_runs) + " profile runs";
  } else if (a.iter) {
    out = "iterations " + JoinInts(a.iter->profile) + " -> " +
          JoinInts(a.iter->injection) + ", p=" + FormatP(a.iter->p_value);
  }
  if (a.delay_value > 0) out += ", delay " + std::to_string(a.delay_value) + "ms";
  return out;
}

const LoopMeta* Meta(const std::vector<LoopMeta>& loops, const std::string& id) {
  for (const auto& l : loops) {
    if (l.loop_id == id) return &l;
  }
  return nullptr;
}

CausalEdge BaseEdge(const InterferenceReport& report, const AdditionalFault& a) {
  CausalEdge e;
  e.kind = BaseEdgeKind(report.injected_kind, a.kind);
  e.src = report.injected;
  e.dst = a.fault_id;
  e.test = report.test;
  e.origin = report.injected;
  e.src_contexts = report.injected_contexts;
  e.dst_contexts = a.contexts;
  e.evidence = EvidenceSummary(a);
  return e;
}

std::vector<StitchContext> LoopContexts(const InterferenceReport& report,
                                        const std::string& loop) {
  auto it = report.loop_contexts.find(loop);
  return it == report.loop_contexts.end() ? std::vector<StitchContext>{}
                                          : it->second;
}

}  // namespace

std::vector<CausalEdge> ExpandNested(const InterferenceReport& report,
                                     const std::vector<LoopMeta>& loops) {
  std::vector<CausalEdge> edges;
  for (const auto& a : report.additional) {
    if (a.kind != FaultKind::kLoopDelay) continue;
    edges.push_back(BaseEdge(report, a));
    const LoopMeta* meta = Meta(loops, a.fault_id);
    if (!meta || !meta->parent_loop) continue;
    CausalEdge up;
    up.kind = EdgeKind::kIcfg;
    up.src = a.fault_id;
    up.dst = *meta->parent_loop;
    up.test = report.test;
    up.origin = report.injected;
    up.src_contexts = a.contexts;
    up.dst_contexts = LoopContexts(report, up.dst);
    up.evidence = "nested in " + up.dst + " (" + EvidenceSummary(a) + ")";
    edges.push_back(up);
    if (!meta->next_sibling_loop) continue;
    CausalEdge next;
    next.kind = EdgeKind::kCfg;
    next.src = *meta->parent_loop;
    next.dst = *meta->next_sibling_loop;
    next.test = report.test;
    next.origin = report.injected;
    next.src_contexts = up.dst_contexts;
    next.dst_contexts = LoopContexts(report, next.dst);
    next.evidence = "follows " + a.fault_id + " in " + next.src;
    edges.push_back(next);
  }
  return edges;
}

std::vector<CausalEdge> EdgesFromReport(const InterferenceReport& report,
                                        const std::vector<LoopMeta>& loops) {
  std::vector<CausalEdge> edges;
  for (const auto& a : report.additional) {
    if (a.kind != FaultKind::kLoopDelay) edges.push_back(BaseEdge(report, a));
  }
  auto nested = ExpandNested(report, loops);
  edges.insert(edges.end(), nested.begin(), nested.end());
  return edges;
}

namespace {

using Json = nlohmann::ordered_json;

Json ContextsToJson(const std::vector<StitchContext>& ctxs) {
  Json arr = Json::array();
  for (const auto& c : ctxs) {
    Json j;
    j["stack"] = c.call_stack;
    j["branches"] = BranchTraceToString(c.branch_trace);
    arr.push_back(j);
  }
  return arr;
}

std::vector<StitchContext> ContextsFromJson(const Json& arr) {
  std::vector<StitchContext> out;
  for (const auto& j : arr) {
    StitchContext c;
    c.call_stack = j.at("stack").get<std::vector<std::string>>();
    c.branch_trace = BranchTraceFromString(j.at("branches").get<std::string>());
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

void WriteEdgeArchive(std::ostream& out, const std::vector<CausalEdge>& edges) {
  out << kEdgesHeader << "\n";
  for (const auto& e : edges) {
    Json j;
    j["kind"] = EdgeKindName(e.kind);
    j["src"] = e.src;
    j["dst"] = e.dst;
    j["test"] = e.test;
    j["origin"] = e.origin;
    j["src_contexts"] = ContextsToJson(e.src_contexts);
    j["dst_contexts"] = ContextsToJson(e.dst_contexts);
    j["evidence"] = e.evidence;
    out << j.dump() << "\n";
  }
}

std::vector<CausalEdge> ReadEdgeArchive(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kEdgesHeader) {
    throw FcaError("edge archive: expected header '" + std::string(kEdgesHeader) + "'");
  }
  std::vector<CausalEdge> edges;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      Json j = Json::parse(line);
      CausalEdge e;
      e.kind = ParseEdgeKind(j.at("kind").get<std::string>());
      e.src = j.at("src").get<std::string>();
      e.dst = j.at("dst").get<std::string>();
      e.test = j.at("test").get<std::string>();
      e.origin = j.at("origin").get<std::string>();
      e.src_contexts = ContextsFromJson(j.at("src_contexts"));
      e.dst_contexts = ContextsFromJson(j.at("dst_contexts"));
      e.evidence = j.at("evidence").get<std::string>();
      edges.push_back(std::move(e));
    } catch (const std::exception& err) {
      throw FcaError("edge archive line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return edges;
}

}  // namespace cascadelab

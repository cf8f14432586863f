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
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cascadelab/scenario.h"
#include "cascadelab/sim.h"

namespace cascadelab {

class FcaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One-sided pooled-variance Student test for "injection mean > profile
// mean". Zero pooled variance: 0.5 on equal means, else 0 or 1 by direction.
double TTestOneSided(const std::vector<int64_t>& profile,
                     const std::vector<int64_t>& injection);

struct TraceEvidence {
  int injection_runs = 0;
  int profile_runs = 0;
  int total_runs = 0;
};

struct IterEvidence {
  std::vector<int64_t> profile;
  std::vector<int64_t> injection;
  double p_value = 1.0;
};

struct AdditionalFault {
  std::string fault_id;
  FaultKind kind = FaultKind::kException;
  std::optional<TraceEvidence> trace;
  std::optional<IterEvidence> iter;
  // One entry for exceptions and negations; distinct loop contexts for delays.
  std::vector<StitchContext> contexts;
  int64_t delay_value = 0;  // Delay value that first exposed this fault.
};

struct InterferenceReport {
  std::string injected;
  FaultKind injected_kind = FaultKind::kException;
  std::string test;
  std::vector<int64_t> delay_values;
  bool target_reached = false;
  std::vector<StitchContext> injected_contexts;
  std::vector<AdditionalFault> additional;
  // Distinct loop contexts seen in the injection runs, per loop.
  std::map<std::string, std::vector<StitchContext>> loop_contexts;

  bool Contains(const std::string& fault_id) const;
  std::vector<std::string> FaultIds() const;
};

struct DiffOptions {
  double p_threshold = 0.1;
  // Include the injected fault in its own report (used by the baseline).
  bool keep_self = false;
  int min_injection_runs = 3;
};

InterferenceReport DiffRuns(const std::vector<RunTrace>& profile,
                            const std::vector<RunTrace>& injection,
                            const std::vector<FaultPoint>& faults,
                            const DiffOptions& options = {});

// Union of per-delay-value reports for one (fault, test) pair.
InterferenceReport MergeReports(const std::vector<InterferenceReport>& reports);

enum class EdgeKind { kExcDelay, kSlowDelay, kExcInj, kSlowInj, kIcfg, kCfg };

std::string EdgeKindName(EdgeKind kind);
EdgeKind ParseEdgeKind(const std::string& name);
bool IsBaseKind(EdgeKind kind);
// True for E(D) and E(I): the matched fault is an exception or negation.
bool IsExceptionKind(EdgeKind kind);
// True for S+(D) and S+(I): the matched fault is a loop delay.
bool IsSlowKind(EdgeKind kind);
// Base edge kind for an (injected, observed) pair of fault kinds.
EdgeKind BaseEdgeKind(FaultKind injected, FaultKind observed);

struct CausalEdge {
  EdgeKind kind = EdgeKind::kExcDelay;
  std::string src;
  std::string dst;
  std::string test;
  // Injected fault of the experiment this edge came from.
  std::string origin;
  std::vector<StitchContext> src_contexts;
  std::vector<StitchContext> dst_contexts;
  std::string evidence;

  bool operator==(const CausalEdge& o) const;
  std::string Key() const;
};

// Base edges for delay observations plus their parent and sibling hops.
std::vector<CausalEdge> ExpandNested(const InterferenceReport& report,
                                     const std::vector<LoopMeta>& loops);

std::vector<CausalEdge> EdgesFromReport(const InterferenceReport& report,
                                        const std::vector<LoopMeta>& loops);

inline constexpr std::string_view kEdgesHeader = "cascadelab-edges v1";

void WriteEdgeArchive(std::ostream& out, const std::vector<CausalEdge>& edges);
std::vector<CausalEdge> ReadEdgeArchive(std::istream& in);

}  // namespace cascadelab

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

#include "cascadelab/stitch.h"

namespace cascadelab {

std::string CompatReasonName(CompatReason reason) {
  switch (reason) {
    case CompatReason::kOk:
      return "ok";
    case CompatReason::kStackMismatch:
      return "stack-mismatch";
    case CompatReason::kTraceMismatch:
      return "trace-mismatch";
    case CompatReason::kKindMismatch:
      return "kind-mismatch";
  }
  return "kind-mismatch";
}

CompatibilityVerdict CompareContexts(const std::vector<StitchContext>& a,
                                     const std::vector<StitchContext>& b,
                                     bool any_pair) {
  if (a.empty() || b.empty()) return {false, CompatReason::kTraceMismatch};
  if (!any_pair) {
    if (a.front().call_stack != b.front().call_stack) {
      return {false, CompatReason::kStackMismatch};
    }
    if (a.front().branch_trace != b.front().branch_trace) {
      return {false, CompatReason::kTraceMismatch};
    }
    return {true, CompatReason::kOk};
  }
  bool stack_seen = false;
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (x.call_stack != y.call_stack) continue;
      stack_seen = true;
      if (x.branch_trace == y.branch_trace) return {true, CompatReason::kOk};
    }
  }
  return {false, stack_seen ? CompatReason::kTraceMismatch : CompatReason::kStackMismatch};
}

CompatibilityVerdict CheckCompatibility(const CausalEdge& e1, const CausalEdge& e2) {
  if (e1.dst != e2.src) return {false, CompatReason::kKindMismatch};
  return CompareContexts(e1.dst_contexts, e2.src_contexts, !IsExceptionKind(e1.kind));
}

namespace {

bool InjectedAtDelay(const CausalEdge& e) {
  return e.kind == EdgeKind::kExcDelay || e.kind == EdgeKind::kSlowDelay;
}

bool InjectedAtNonDelay(const CausalEdge& e) {
  return e.kind == EdgeKind::kExcInj || e.kind == EdgeKind::kSlowInj;
}

bool SameExperiment(const CausalEdge& a, const CausalEdge& b) {
  return a.origin == b.origin && a.test == b.test;
}

StitchResult Checked(const CausalEdge& e1, const CausalEdge& e2, StitchShape shape) {
  CompatibilityVerdict v = CheckCompatibility(e1, e2);
  return {v.compatible, v.compatible ? shape : StitchShape::kNone, v.reason};
}

}  // namespace

StitchResult Stitch(const CausalEdge& e1, const CausalEdge& e2) {
  const StitchResult reject{false, StitchShape::kNone, CompatReason::kKindMismatch};
  if (e1.dst != e2.src) return reject;
  if (IsBaseKind(e2.kind) && e2.origin != e2.src) return reject;
  if (IsExceptionKind(e1.kind)) {
    if (!InjectedAtNonDelay(e2)) return reject;
    return Checked(e1, e2, StitchShape::kException);
  }
  if (IsSlowKind(e1.kind)) {
    if (InjectedAtDelay(e2)) return Checked(e1, e2, StitchShape::kDelay);
    if (e2.kind == EdgeKind::kIcfg && SameExperiment(e1, e2)) {
      return {true, StitchShape::kParentHop, CompatReason::kOk};
    }
    return reject;
  }
  if (e1.kind == EdgeKind::kIcfg) {
    if (InjectedAtDelay(e2)) return Checked(e1, e2, StitchShape::kParentEnter);
    if (e2.kind == EdgeKind::kCfg && SameExperiment(e1, e2)) {
      return {true, StitchShape::kSiblingHop, CompatReason::kOk};
    }
    return reject;
  }
  if (e1.kind == EdgeKind::kCfg && InjectedAtDelay(e2)) {
    return Checked(e1, e2, StitchShape::kSiblingEnter);
  }
  return reject;
}

}  // namespace cascadelab

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

#include <string>
#include <vector>

#include "cascadelab/fca.h"

namespace cascadelab {

enum class CompatReason { kOk, kStackMismatch, kTraceMismatch, kKindMismatch };

std::string CompatReasonName(CompatReason reason);

struct CompatibilityVerdict {
  bool compatible = false;
  CompatReason reason = CompatReason::kKindMismatch;
};

// Compares e1's destination contexts with e2's source contexts. Exception
// and negation matches need the single contexts to agree; delay matches
// need any pair to agree.
CompatibilityVerdict CheckCompatibility(const CausalEdge& e1, const CausalEdge& e2);

// Compares two context sets directly. `any_pair` selects the delay rule.
CompatibilityVerdict CompareContexts(const std::vector<StitchContext>& a,
                                     const std::vector<StitchContext>& b,
                                     bool any_pair);

enum class StitchShape {
  kNone,
  kException,     // E-matched exception or negation.
  kDelay,         // S+-matched delay.
  kParentHop,     // S+ then ICFG to the parent loop.
  kParentEnter,   // ICFG into an injection at the parent loop.
  kSiblingHop,    // ICFG then CFG to the sibling loop.
  kSiblingEnter,  // CFG into an injection at the sibling loop.
};

struct StitchResult {
  bool ok = false;
  StitchShape shape = StitchShape::kNone;
  CompatReason reason = CompatReason::kKindMismatch;
};

// Whether e2 may follow e1 in a propagation chain.
StitchResult Stitch(const CausalEdge& e1, const CausalEdge& e2);

}  // namespace cascadelab

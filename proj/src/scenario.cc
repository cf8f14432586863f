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

#include "cascadelab/scenario.h"

namespace cascadelab {

const Handler* Component::FindHandler(const std::string& handler) const {
  for (const auto& h : handlers) {
    if (h.name == handler) return &h;
  }
  return nullptr;
}

const DetectorDecl* Component::FindDetector(const std::string& detector) const {
  for (const auto& d : detectors) {
    if (d.id == detector) return &d;
  }
  return nullptr;
}

const Component* Scenario::FindComponent(const std::string& component) const {
  for (const auto& c : components) {
    if (c.name == component) return &c;
  }
  return nullptr;
}

const TestWorkload* Scenario::FindTest(const std::string& test) const {
  for (const auto& t : tests) {
    if (t.name == test) return &t;
  }
  return nullptr;
}

const LoopMeta* Scenario::FindLoop(const std::string& loop_id) const {
  for (const auto& l : loops) {
    if (l.loop_id == loop_id) return &l;
  }
  return nullptr;
}

std::string FaultKindName(FaultKind kind) {
  switch (kind) {
    case FaultKind::kException:
      return "exception";
    case FaultKind::kLoopDelay:
      return "delay";
    case FaultKind::kNegation:
      return "negation";
  }
  return "unknown";
}

}  // namespace cascadelab

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

#include <set>
#include <string>
#include <vector>

#include "cascadelab/scenario.h"

namespace cascadelab {

// Loops removed by the scalability filter: constant-bound loops, plus the
// floor(10%) smallest loops by reachable size that perform no I/O.
std::set<std::string> FilterLoops(const Scenario& s);

// Detectors with any static filtering attribute set.
std::set<std::string> FilterDetectors(const Scenario& s);

// All injectable points in declaration order.
std::vector<FaultPoint> EnumerateFaultPoints(const Scenario& s);

const FaultPoint* FindFault(const std::vector<FaultPoint>& faults,
                            const std::string& id);

}  // namespace cascadelab

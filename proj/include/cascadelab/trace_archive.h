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

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cascadelab/sim.h"

namespace cascadelab {

inline constexpr std::string_view kTraceHeader = "cascadelab-trace v1";

class ArchiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes one JSON record per event after the version header.
void WriteTraceArchive(std::ostream& out, const std::vector<RunTrace>& traces);
std::string TraceArchiveToString(const std::vector<RunTrace>& traces);

// Coverage is not part of the archive and comes back empty.
std::vector<RunTrace> ReadTraceArchive(std::istream& in);

}  // namespace cascadelab

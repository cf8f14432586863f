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

#include <stdexcept>
#include <string>
#include <string_view>

#include "cascadelab/scenario.h"

namespace cascadelab {

inline constexpr std::string_view kScenarioHeader = "cascadelab-scenario v1";

class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { kSyntax, kReference, kIo };

  ScenarioError(Kind kind, int line, int column, const std::string& message);

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

// Parses and validates scenario text. Throws ScenarioError.
Scenario ParseScenario(std::string_view source);

Scenario LoadScenarioFile(const std::string& path);

}  // namespace cascadelab

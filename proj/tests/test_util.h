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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cascadelab/fca.h"
#include "cascadelab/scenario.h"
#include "cascadelab/scenario_parser.h"

namespace cascadelab::testing {

inline std::string ScenarioPath(const std::string& name) {
  return std::string(CASCADELAB_SCENARIO_DIR) + "/" + name + ".scn";
}

inline Scenario LoadBundled(const std::string& name) {
  return LoadScenarioFile(ScenarioPath(name));
}

inline std::string ReadFileText(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cascadelab-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline StitchContext Ctx(std::vector<std::string> stack,
                         std::vector<BranchOutcome> branches = {}) {
  return StitchContext{std::move(stack), std::move(branches)};
}

inline CausalEdge MakeEdge(EdgeKind kind, const std::string& src, const std::string& dst,
                           const std::string& test,
                           std::vector<StitchContext> src_ctx = {Ctx({})},
                           std::vector<StitchContext> dst_ctx = {Ctx({})},
                           std::string origin = "") {
  CausalEdge e;
  e.kind = kind;
  e.src = src;
  e.dst = dst;
  e.test = test;
  e.origin = origin.empty() ? src : origin;
  e.src_contexts = std::move(src_ctx);
  e.dst_contexts = std::move(dst_ctx);
  return e;
}

}  // namespace cascadelab::testing

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
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cascadelab/expr.h"

namespace cascadelab {

struct Statement;
using Block = std::vector<Statement>;

// Named argument passed to a handler by call, send or a test request.
struct Argument {
  std::string name;
  Expr value;
};

struct IfStmt {
  Expr condition;
  Block then_body;
  Block else_body;
};

struct LoopStmt {
  std::string loop_id;
  Expr bound;
  bool constant_bound = false;
  bool performs_io = false;
  int64_t jitter = 0;
  Block body;
};

// Re-executes its body while an exception escapes it, up to `attempts`
// times. Each attempt counts as one iteration of `loop_id`.
struct RetryStmt {
  std::string loop_id;
  Expr attempts;
  std::optional<Expr> backoff;
  bool constant_bound = false;
  bool performs_io = false;
  Block body;
};

struct CallStmt {
  std::string handler;
  std::vector<Argument> args;
};

struct SendStmt {
  std::string component;
  std::string handler;
  std::vector<Argument> args;
  std::optional<Expr> size;
  std::optional<Expr> timeout;
  // Set when `timeout` is present: the injectable timeout raised at the site.
  std::string timeout_id;
  std::string timeout_exception;
};

// `throw <id> <Exception> if <guard>`: the guard is the throw point.
struct ThrowStmt {
  std::string point_id;
  std::string exception;
  Expr guard;
  bool excluded = false;
};

struct LibCallStmt {
  std::string call_id;
  // Empty when the call declares no exception (not injectable).
  std::string exception;
  std::optional<Expr> fails_if;
  std::optional<Expr> cost;
};

// Calls a detector; `on_error` runs when the detector reports an error.
struct DetectStmt {
  std::string detector_id;
  std::vector<Argument> args;
  Block on_error;
};

struct WorkStmt {
  Expr amount;
};

struct SleepStmt {
  Expr amount;
};

// `set` assigns state or a local; `let` introduces a local.
struct AssignStmt {
  std::string name;
  Expr value;
  bool declares_local = false;
};

struct TryStmt {
  Block body;
  std::string catch_type;  // "*" catches everything.
  Block handler;
};

struct Statement {
  std::string id;  // "<component>.<handler>#<n>", unique scenario-wide.
  int line = 0;
  std::variant<IfStmt, LoopStmt, RetryStmt, CallStmt, SendStmt, ThrowStmt,
               LibCallStmt, DetectStmt, WorkStmt, SleepStmt, AssignStmt,
               TryStmt>
      node;
};

struct Parameter {
  std::string name;
  Expr default_value;
};

struct Handler {
  std::string name;
  std::vector<Parameter> params;
  Block body;
  int line = 0;
};

// Static filtering attributes of a boolean error detector.
struct DetectorAttributes {
  bool final_only_inputs = false;
  bool constant_or_unused_return = false;
  bool primitive_only_computation = false;
  bool jdk_like_utility = false;
};

// A boolean detector: returns `healthy_when`; false means an error.
struct DetectorDecl {
  std::string id;
  std::vector<Parameter> params;
  Expr healthy_when;
  DetectorAttributes attributes;
  int line = 0;
};

struct Component {
  std::string name;
  std::vector<Handler> handlers;
  std::vector<DetectorDecl> detectors;

  const Handler* FindHandler(const std::string& handler) const;
  const DetectorDecl* FindDetector(const std::string& detector) const;
};

struct Request {
  std::string component;
  std::string handler;
  std::vector<Argument> args;
  int line = 0;
};

struct TestWorkload {
  std::string name;
  std::vector<Request> requests;
  std::map<std::string, Value> config_overrides;
  int64_t expected_duration_ms = 0;
};

struct StateVar {
  std::string name;
  Expr initial;
};

// One step of an authored ground-truth cycle.
struct PlantedEdge {
  std::string src;
  std::string kind;
  std::string dst;
  std::string test;
};

struct ScenarioConfig {
  std::map<std::string, Value> values;
  int64_t work_jitter_ms = 0;
};

struct LoopMeta {
  std::string loop_id;
  bool constant_bound = false;
  int64_t reachable_code_size = 0;
  bool performs_io = false;
  std::optional<std::string> parent_loop;
  std::optional<std::string> next_sibling_loop;
  std::string statement_id;
  std::string component;
  std::string handler;
};

struct Scenario {
  std::string name;
  ScenarioConfig config;
  std::vector<StateVar> state;
  std::vector<Component> components;
  std::vector<TestWorkload> tests;
  std::vector<PlantedEdge> planted;
  // Derived at parse time; ordered by statement pre-order.
  std::vector<LoopMeta> loops;

  const Component* FindComponent(const std::string& component) const;
  const TestWorkload* FindTest(const std::string& test) const;
  const LoopMeta* FindLoop(const std::string& loop_id) const;
};

enum class FaultKind { kException, kLoopDelay, kNegation };

std::string FaultKindName(FaultKind kind);

struct FaultPoint {
  std::string id;
  FaultKind kind = FaultKind::kException;
  std::string component;
  std::string handler;  // Empty for detectors.
  std::optional<std::string> enclosing_loop;
  // Statements whose coverage means this fault is reachable.
  std::vector<std::string> anchors;
  std::string exception;  // Exception type for kException.
};

}  // namespace cascadelab

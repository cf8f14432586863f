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

#include "cascadelab/sim.h"

#include <algorithm>
#include <random>
#include <sstream>

namespace cascadelab {

std::string InjectionModeName(InjectionMode mode) {
  switch (mode) {
    case InjectionMode::kNone:
      return "none";
    case InjectionMode::kOneShotException:
      return "oneshot";
    case InjectionMode::kDelay:
      return "delay";
    case InjectionMode::kNegate:
      return "negate";
  }
  return "none";
}

InjectionMode ParseInjectionMode(const std::string& name) {
  if (name == "oneshot") return InjectionMode::kOneShotException;
  if (name == "delay") return InjectionMode::kDelay;
  if (name == "negate") return InjectionMode::kNegate;
  if (name == "none") return InjectionMode::kNone;
  throw SimError("unknown injection mode '" + name + "'");
}

InjectionPlan InjectionPlan::For(const FaultPoint& fault, int64_t delay_ms) {
  InjectionPlan plan;
  plan.target = fault.id;
  switch (fault.kind) {
    case FaultKind::kException:
      plan.mode = InjectionMode::kOneShotException;
      break;
    case FaultKind::kLoopDelay:
      plan.mode = InjectionMode::kDelay;
      plan.delay_ms = delay_ms;
      break;
    case FaultKind::kNegation:
      plan.mode = InjectionMode::kNegate;
      break;
  }
  return plan;
}

std::string BranchTraceToString(const std::vector<BranchOutcome>& trace) {
  std::string out;
  for (const auto& b : trace) {
    if (!out.empty()) out += ';';
    out += b.branch_id + (b.taken ? ":1" : ":0");
  }
  return out;
}

std::vector<BranchOutcome> BranchTraceFromString(const std::string& text) {
  std::vector<BranchOutcome> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    auto colon = item.rfind(':');
    if (colon == std::string::npos) {
      throw SimError("malformed branch trace entry '" + item + "'");
    }
    out.push_back({item.substr(0, colon), item.substr(colon + 1) == "1"});
  }
  return out;
}

NoiseModel NoiseModel::ForScenario(const Scenario& s, uint64_t seed) {
  NoiseModel noise;
  noise.seed = seed;
  noise.work_jitter_ms = s.config.work_jitter_ms;
  // Loop jitter is declared on the statement; collect it here.
  std::vector<const Block*> pending;
  for (const auto& c : s.components) {
    for (const auto& h : c.handlers) pending.push_back(&h.body);
  }
  while (!pending.empty()) {
    const Block* block = pending.back();
    pending.pop_back();
    for (const auto& st : *block) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, LoopStmt>) {
              if (node.jitter > 0) noise.iteration_jitter[node.loop_id] = node.jitter;
              pending.push_back(&node.body);
            } else if constexpr (std::is_same_v<T, RetryStmt>) {
              pending.push_back(&node.body);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
              pending.push_back(&node.then_body);
              pending.push_back(&node.else_body);
            } else if constexpr (std::is_same_v<T, TryStmt>) {
              pending.push_back(&node.body);
              pending.push_back(&node.handler);
            } else if constexpr (std::is_same_v<T, DetectStmt>) {
              pending.push_back(&node.on_error);
            }
          },
          st.node);
    }
  }
  return noise;
}

std::string MakeRunId(const std::string& test, const InjectionPlan& plan,
                      int repetition) {
  std::string id = test + "/";
  if (plan.IsProfile()) {
    id += "profile";
  } else {
    id += *plan.target + "/" + InjectionModeName(plan.mode);
    if (plan.mode == InjectionMode::kDelay) id += "@" + std::to_string(plan.delay_ms);
  }
  return id + "/r" + std::to_string(repetition);
}

namespace {

constexpr int kMaxCallDepth = 64;
constexpr uint64_t kMaxSteps = 2'000'000;
constexpr size_t kMaxLoopContexts = 32;

uint64_t Fnv1a(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Draw keyed on (seed, site, ordinal) so that unrelated sites never shift
// each other's random streams.
int64_t KeyedDraw(uint64_t seed, const std::string& site, uint64_t ordinal,
                  int64_t lo, int64_t hi) {
  uint64_t h = Fnv1a(site);
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(h), static_cast<uint32_t>(h >> 32),
                    static_cast<uint32_t>(ordinal),
                    static_cast<uint32_t>(ordinal >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int64_t> dist(lo, hi);
  return dist(rng);
}

struct Thrown {
  std::string exception;
  std::string fault_id;
  bool abort = false;  // Run-level stop; never caught.
};

using Outcome = std::optional<Thrown>;

class Interpreter {
 public:
  Interpreter(const Scenario& s, const TestWorkload& t,
              const InjectionPlan& plan, const NoiseModel& noise)
      : s_(s), t_(t), plan_(plan), noise_(noise) {
    trace_.test = t.name;
    trace_.injection = plan;
    trace_.seed = noise.seed;
    config_ = s.config.values;
    for (const auto& [k, v] : t.config_overrides) config_[k] = v;
  }

  RunTrace Run() {
    for (const auto& sv : s_.state) {
      state_[sv.name] = Evaluate(sv.initial, [&](const std::string& n) {
        return Lookup(n, nullptr);
      });
    }
    for (const auto& r : t_.requests) {
      const Component* comp = s_.FindComponent(r.component);
      const Handler* h = comp->FindHandler(r.handler);
      auto args = EvalArgs(r.args);
      Outcome out = Invoke(*comp, *h, args);
      if (out && out->abort) break;
    }
    trace_.wall = now_;
    trace_.exceeded_duration =
        t_.expected_duration_ms > 0 && now_ > t_.expected_duration_ms;
    return std::move(trace_);
  }

 private:
  struct Frame {
    const Component* component;
    std::map<std::string, Value> locals;
    int64_t start;
  };

  Value Lookup(const std::string& name,
               const std::map<std::string, Value>* locals) const {
    if (locals) {
      auto it = locals->find(name);
      if (it != locals->end()) return it->second;
    }
    if (auto it = state_.find(name); it != state_.end()) return it->second;
    if (auto it = config_.find(name); it != config_.end()) return it->second;
    if (name == "now") return now_;
    if (name == "elapsed") {
      return frames_.empty() ? now_ : now_ - frames_.back().start;
    }
    throw SimError("undefined name '" + name + "'");
  }

  Value Eval(const Expr& e, const std::string& where) const {
    const auto* locals = frames_.empty() ? nullptr : &frames_.back().locals;
    try {
      return Evaluate(e, [&](const std::string& n) { return Lookup(n, locals); });
    } catch (const EvalError& err) {
      throw SimError(where + ": " + err.what());
    }
  }

  std::vector<std::pair<std::string, Value>> EvalArgs(
      const std::vector<Argument>& args, const std::string& where = "request") {
    std::vector<std::pair<std::string, Value>> out;
    for (const auto& a : args) out.emplace_back(a.name, Eval(a.value, where));
    return out;
  }

  StitchContext Capture() const {
    StitchContext ctx;
    for (auto it = call_sites_.rbegin();
         it != call_sites_.rend() && ctx.call_stack.size() < 2; ++it) {
      ctx.call_stack.push_back(*it);
    }
    if (!scopes_.empty()) ctx.branch_trace = scopes_.back();
    return ctx;
  }

  void Record(const std::string& fault_id, const std::string& exception,
              bool injected) {
    trace_.fault_events.push_back({fault_id, exception, Capture(), now_, injected});
  }

  bool IsTarget(const std::string& id, InjectionMode mode) const {
    return plan_.target && *plan_.target == id && plan_.mode == mode;
  }

  bool TakeOneShot(const std::string& id) {
    if (fired_ || !IsTarget(id, InjectionMode::kOneShotException)) return false;
    fired_ = true;
    trace_.target_reached = true;
    return true;
  }

  Outcome Abort() {
    trace_.step_limit_hit = true;
    return Thrown{"", "", true};
  }

  Outcome Invoke(const Component& comp, const Handler& h,
                 const std::vector<std::pair<std::string, Value>>& args) {
    if (static_cast<int>(frames_.size()) >= kMaxCallDepth) return Abort();
    Frame frame{&comp, {}, now_};
    for (const auto& p : h.params) frame.locals[p.name] = p.default_value.literal;
    for (const auto& [name, value] : args) frame.locals[name] = value;
    frames_.push_back(std::move(frame));
    scopes_.emplace_back();
    Outcome out = ExecBlock(h.body);
    scopes_.pop_back();
    frames_.pop_back();
    return out;
  }

  Outcome ExecBlock(const Block& block) {
    for (const auto& st : block) {
      if (++steps_ > kMaxSteps) return Abort();
      trace_.coverage.insert(st.id);
      Outcome out = std::visit([&](const auto& node) { return Exec(st, node); },
                               st.node);
      if (out) return out;
    }
    return std::nullopt;
  }

  Outcome Exec(const Statement& st, const IfStmt& node) {
    bool cond = Truthy(Eval(node.condition, st.id));
    scopes_.back().push_back({st.id, cond});
    return ExecBlock(cond ? node.then_body : node.else_body);
  }

  void StartIteration(const std::string& loop_id, LoopRecord& rec) {
    ++rec.count;
    if (IsTarget(loop_id, InjectionMode::kDelay)) {
      trace_.target_reached = true;
      now_ += plan_.delay_ms;
    }
    scopes_.emplace_back();
  }

  void EndIteration(LoopRecord& rec) {
    StitchContext ctx = Capture();
    scopes_.pop_back();
    if (rec.contexts.size() < kMaxLoopContexts &&
        std::find(rec.contexts.begin(), rec.contexts.end(), ctx) ==
            rec.contexts.end()) {
      rec.contexts.push_back(std::move(ctx));
    }
  }

  Outcome Exec(const Statement& st, const LoopStmt& node) {
    int64_t bound = AsIntAt(Eval(node.bound, st.id), st.id);
    auto jit = noise_.iteration_jitter.find(node.loop_id);
    if (jit != noise_.iteration_jitter.end()) {
      uint64_t ordinal = ordinals_[node.loop_id]++;
      bound += KeyedDraw(noise_.seed, node.loop_id, ordinal, -jit->second, jit->second);
    }
    bound = std::max<int64_t>(bound, 0);
    LoopRecord& rec = trace_.loop_counts[node.loop_id];
    for (int64_t i = 0; i < bound; ++i) {
      StartIteration(node.loop_id, rec);
      Outcome out = ExecBlock(node.body);
      EndIteration(rec);
      if (out) return out;
    }
    return std::nullopt;
  }

  Outcome Exec(const Statement& st, const RetryStmt& node) {
    int64_t attempts = AsIntAt(Eval(node.attempts, st.id), st.id);
    LoopRecord& rec = trace_.loop_counts[node.loop_id];
    Outcome last;
    for (int64_t i = 0; i < attempts; ++i) {
      StartIteration(node.loop_id, rec);
      last = ExecBlock(node.body);
      EndIteration(rec);
      if (!last) return std::nullopt;
      if (last->abort) return last;
      if (node.backoff && i + 1 < attempts) {
        now_ += std::max<int64_t>(0, AsIntAt(Eval(*node.backoff, st.id), st.id));
      }
    }
    return last;
  }

  Outcome Exec(const Statement& st, const CallStmt& node) {
    const Component& comp = *frames_.back().component;
    const Handler* h = comp.FindHandler(node.handler);
    auto args = EvalArgs(node.args, st.id);
    call_sites_.push_back(st.id);
    Outcome out = Invoke(comp, *h, args);
    call_sites_.pop_back();
    return out;
  }

  Outcome Exec(const Statement& st, const SendStmt& node) {
    const Component* comp = s_.FindComponent(node.component);
    const Handler* h = comp->FindHandler(node.handler);
    auto args = EvalArgs(node.args, st.id);
    if (node.timeout && TakeOneShot(node.timeout_id)) {
      Record(node.timeout_id, node.timeout_exception, true);
      return Thrown{node.timeout_exception, node.timeout_id};
    }
    int64_t start = now_;
    if (node.size) now_ += std::max<int64_t>(0, AsIntAt(Eval(*node.size, st.id), st.id));
    call_sites_.push_back(st.id);
    Outcome out = Invoke(*comp, *h, args);
    call_sites_.pop_back();
    if (out && out->abort) return out;
    if (node.timeout) {
      int64_t limit = AsIntAt(Eval(*node.timeout, st.id), st.id);
      if (now_ - start > limit) {
        Record(node.timeout_id, node.timeout_exception, false);
        return Thrown{node.timeout_exception, node.timeout_id};
      }
    }
    return out;
  }

  Outcome Exec(const Statement& st, const ThrowStmt& node) {
    if (!node.excluded && TakeOneShot(node.point_id)) {
      Record(node.point_id, node.exception, true);
      return Thrown{node.exception, node.point_id};
    }
    if (Truthy(Eval(node.guard, st.id))) {
      Record(node.point_id, node.exception, false);
      return Thrown{node.exception, node.point_id};
    }
    return std::nullopt;
  }

  Outcome Exec(const Statement& st, const LibCallStmt& node) {
    if (!node.exception.empty() && TakeOneShot(node.call_id)) {
      Record(node.call_id, node.exception, true);
      return Thrown{node.exception, node.call_id};
    }
    if (node.cost) now_ += std::max<int64_t>(0, AsIntAt(Eval(*node.cost, st.id), st.id));
    if (node.fails_if && Truthy(Eval(*node.fails_if, st.id))) {
      Record(node.call_id, node.exception, false);
      return Thrown{node.exception, node.call_id};
    }
    return std::nullopt;
  }

  Outcome Exec(const Statement& st, const DetectStmt& node) {
    const Component& comp = *frames_.back().component;
    const DetectorDecl* det = comp.FindDetector(node.detector_id);
    std::map<std::string, Value> params;
    for (const auto& p : det->params) params[p.name] = p.default_value.literal;
    for (auto& [name, value] : EvalArgs(node.args, st.id)) params[name] = value;
    bool healthy;
    try {
      healthy = Truthy(Evaluate(det->healthy_when, [&](const std::string& n) {
        return Lookup(n, &params);
      }));
    } catch (const EvalError& err) {
      throw SimError(node.detector_id + ": " + err.what());
    }
    bool error = !healthy;
    if (error) Record(node.detector_id, "", false);
    if (IsTarget(node.detector_id, InjectionMode::kNegate)) {
      if (!trace_.target_reached) {
        trace_.target_reached = true;
        Record(node.detector_id, "", true);
      }
      error = !error;
    }
    scopes_.back().push_back({st.id, error});
    if (error) return ExecBlock(node.on_error);
    return std::nullopt;
  }

  Outcome Exec(const Statement& st, const WorkStmt& node) {
    int64_t amount = std::max<int64_t>(0, AsIntAt(Eval(node.amount, st.id), st.id));
    if (noise_.work_jitter_ms > 0) {
      uint64_t ordinal = ordinals_[st.id]++;
      amount += KeyedDraw(noise_.seed, st.id, ordinal, 0, noise_.work_jitter_ms);
    }
    now_ += amount;
    return std::nullopt;
  }

  Outcome Exec(const Statement& st, const SleepStmt& node) {
    now_ += std::max<int64_t>(0, AsIntAt(Eval(node.amount, st.id), st.id));
    return std::nullopt;
  }

  Outcome Exec(const Statement& st, const AssignStmt& node) {
    Value v = Eval(node.value, st.id);
    auto& locals = frames_.back().locals;
    if (node.declares_local || locals.count(node.name)) {
      locals[node.name] = std::move(v);
    } else {
      state_[node.name] = std::move(v);
    }
    return std::nullopt;
  }

  Outcome Exec(const Statement&, const TryStmt& node) {
    Outcome out = ExecBlock(node.body);
    if (out && !out->abort &&
        (node.catch_type == "*" || node.catch_type == out->exception)) {
      return ExecBlock(node.handler);
    }
    return out;
  }

  static int64_t AsIntAt(const Value& v, const std::string& where) {
    try {
      return AsInt(v);
    } catch (const EvalError& err) {
      throw SimError(where + ": " + err.what());
    }
  }

  const Scenario& s_;
  const TestWorkload& t_;
  const InjectionPlan& plan_;
  const NoiseModel& noise_;
  RunTrace trace_;
  int64_t now_ = 0;
  std::map<std::string, Value> state_;
  std::map<std::string, Value> config_;
  std::vector<Frame> frames_;
  std::vector<std::string> call_sites_;
  std::vector<std::vector<BranchOutcome>> scopes_;
  std::map<std::string, uint64_t> ordinals_;
  uint64_t steps_ = 0;
  bool fired_ = false;
};

}  // namespace

RunTrace Execute(const Scenario& s, const TestWorkload& t,
                 const InjectionPlan& plan, const NoiseModel& noise) {
  Interpreter interp(s, t, plan, noise);
  return interp.Run();
}

std::vector<RunTrace> RunRepeated(const Scenario& s, const TestWorkload& t,
                                  const InjectionPlan& plan,
                                  uint64_t base_seed) {
  std::vector<RunTrace> runs;
  for (int k = 0; k < kRepetitions; ++k) {
    NoiseModel noise = NoiseModel::ForScenario(s, base_seed + k);
    RunTrace trace = Execute(s, t, plan, noise);
    trace.run_id = MakeRunId(t.name, plan, k);
    runs.push_back(std::move(trace));
  }
  return runs;
}

std::map<std::string, std::set<std::string>> BuildReachability(
    const Scenario& s, const std::vector<FaultPoint>& faults,
    const std::vector<RunTrace>& profile_traces) {
  std::map<std::string, std::set<std::string>> coverage;
  for (const auto& tr : profile_traces) {
    auto& cov = coverage[tr.test];
    cov.insert(tr.coverage.begin(), tr.coverage.end());
  }
  for (const auto& t : s.tests) {
    if (!coverage.count(t.name)) {
      throw SimError("missing profile trace for test '" + t.name + "'");
    }
  }
  std::map<std::string, std::set<std::string>> out;
  for (const auto& f : faults) {
    auto& tests = out[f.id];
    for (const auto& t : s.tests) {
      const auto& cov = coverage[t.name];
      for (const auto& anchor : f.anchors) {
        if (cov.count(anchor)) {
          tests.insert(t.name);
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace cascadelab

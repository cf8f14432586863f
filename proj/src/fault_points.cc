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

#include "cascadelab/fault_points.h"

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>

namespace cascadelab {

std::set<std::string> FilterLoops(const Scenario& s) {
  std::set<std::string> excluded;
  for (const auto& l : s.loops) {
    if (l.constant_bound) excluded.insert(l.loop_id);
  }
  std::vector<const LoopMeta*> ranked;
  for (const auto& l : s.loops) ranked.push_back(&l);
  std::sort(ranked.begin(), ranked.end(),
            [](const LoopMeta* a, const LoopMeta* b) {
              return std::tie(a->reachable_code_size, a->loop_id) <
                     std::tie(b->reachable_code_size, b->loop_id);
            });
  size_t lowest = ranked.size() / 10;
  for (size_t i = 0; i < lowest; ++i) {
    if (!ranked[i]->performs_io) excluded.insert(ranked[i]->loop_id);
  }
  return excluded;
}

std::set<std::string> FilterDetectors(const Scenario& s) {
  std::set<std::string> excluded;
  for (const auto& c : s.components) {
    for (const auto& d : c.detectors) {
      const auto& a = d.attributes;
      if (a.final_only_inputs || a.constant_or_unused_return ||
          a.primitive_only_computation || a.jdk_like_utility) {
        excluded.insert(d.id);
      }
    }
  }
  return excluded;
}

namespace {

struct Ordered {
  int line;
  size_t seq;
  FaultPoint fault;
};

class Enumerator {
 public:
  Enumerator(const Scenario& s)
      : s_(s), excluded_loops_(FilterLoops(s)),
        excluded_detectors_(FilterDetectors(s)) {}

  std::vector<FaultPoint> Run() {
    for (const auto& c : s_.components) {
      for (const auto& d : c.detectors) {
        if (excluded_detectors_.count(d.id)) continue;
        FaultPoint f;
        f.id = d.id;
        f.kind = FaultKind::kNegation;
        f.component = c.name;
        detector_index_[c.name + "/" + d.id] = out_.size();
        out_.push_back({d.line, out_.size(), std::move(f)});
      }
      for (const auto& h : c.handlers) Walk(c, h, h.body, std::nullopt);
    }
    std::stable_sort(out_.begin(), out_.end(),
                     [](const Ordered& a, const Ordered& b) {
                       return std::tie(a.line, a.seq) < std::tie(b.line, b.seq);
                     });
    std::vector<FaultPoint> faults;
    for (auto& o : out_) faults.push_back(std::move(o.fault));
    return faults;
  }

 private:
  void Add(const Component& c, const Handler& h, const Statement& st,
           const std::string& id, FaultKind kind,
           const std::optional<std::string>& loop,
           const std::string& exception) {
    FaultPoint f;
    f.id = id;
    f.kind = kind;
    f.component = c.name;
    f.handler = h.name;
    f.enclosing_loop = loop;
    f.anchors = {st.id};
    f.exception = exception;
    out_.push_back({st.line, out_.size(), std::move(f)});
  }

  void Walk(const Component& c, const Handler& h, const Block& block,
            const std::optional<std::string>& loop) {
    for (const auto& st : block) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IfStmt>) {
              Walk(c, h, node.then_body, loop);
              Walk(c, h, node.else_body, loop);
            } else if constexpr (std::is_same_v<T, LoopStmt> ||
                                 std::is_same_v<T, RetryStmt>) {
              if (!excluded_loops_.count(node.loop_id)) {
                Add(c, h, st, node.loop_id, FaultKind::kLoopDelay, loop, "");
              }
              Walk(c, h, node.body, node.loop_id);
            } else if constexpr (std::is_same_v<T, TryStmt>) {
              Walk(c, h, node.body, loop);
              Walk(c, h, node.handler, loop);
            } else if constexpr (std::is_same_v<T, DetectStmt>) {
              auto it = detector_index_.find(c.name + "/" + node.detector_id);
              if (it != detector_index_.end()) {
                out_[it->second].fault.anchors.push_back(st.id);
              }
              Walk(c, h, node.on_error, loop);
            } else if constexpr (std::is_same_v<T, ThrowStmt>) {
              if (!node.excluded) {
                Add(c, h, st, node.point_id, FaultKind::kException, loop,
                    node.exception);
              }
            } else if constexpr (std::is_same_v<T, LibCallStmt>) {
              if (!node.exception.empty()) {
                Add(c, h, st, node.call_id, FaultKind::kException, loop,
                    node.exception);
              }
            } else if constexpr (std::is_same_v<T, SendStmt>) {
              if (node.timeout) {
                Add(c, h, st, node.timeout_id, FaultKind::kException, loop,
                    node.timeout_exception);
              }
            }
          },
          st.node);
    }
  }

  const Scenario& s_;
  std::set<std::string> excluded_loops_;
  std::set<std::string> excluded_detectors_;
  std::map<std::string, size_t> detector_index_;
  std::vector<Ordered> out_;
};

}  // namespace

std::vector<FaultPoint> EnumerateFaultPoints(const Scenario& s) {
  return Enumerator(s).Run();
}

const FaultPoint* FindFault(const std::vector<FaultPoint>& faults,
                            const std::string& id) {
  for (const auto& f : faults) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

}  // namespace cascadelab

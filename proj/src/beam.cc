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

#include "cascadelab/beam.h"

#include <algorithm>
#include <map>
#include <thread>

#include "cascadelab/stitch.h"

namespace cascadelab {

double ScoreChain(const std::vector<CausalEdge>& chain_edges,
                  const std::vector<FaultCluster>& clusters) {
  double sum = 0;
  size_t n = 0;
  for (const auto& e : chain_edges) {
    if (!IsBaseKind(e.kind)) continue;
    const FaultCluster* c = ClusterOf(clusters, e.origin);
    sum += c && c->sim_score ? *c->sim_score : 1.0;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::vector<std::vector<size_t>> BuildSuccessors(const std::vector<CausalEdge>& edges) {
  std::vector<std::vector<size_t>> succ(edges.size());
  for (size_t i = 0; i < edges.size(); ++i) {
    for (size_t j = 0; j < edges.size(); ++j) {
      if (Stitch(edges[i], edges[j]).ok) succ[i].push_back(j);
    }
  }
  return succ;
}

size_t DelayInjections(const std::vector<CausalEdge>& edges,
                       const std::vector<size_t>& chain) {
  size_t n = 0;
  for (size_t i : chain) {
    const auto k = edges[i].kind;
    n += k == EdgeKind::kExcDelay || k == EdgeKind::kSlowDelay;
  }
  return n;
}

namespace {

struct Scored {
  std::vector<size_t> edges;
  double score;
};

bool Before(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.edges < b.edges;
}

struct Scorer {
  const std::vector<CausalEdge>& edges;
  std::vector<double> edge_sim;  // Sim-score of base edges' clusters.

  Scorer(const std::vector<CausalEdge>& e, const std::vector<FaultCluster>& clusters)
      : edges(e), edge_sim(e.size(), 0.0) {
    for (size_t i = 0; i < e.size(); ++i) {
      edge_sim[i] = ScoreChain({e[i]}, clusters);
    }
  }

  double Score(const std::vector<size_t>& chain) const {
    double sum = 0;
    size_t n = 0;
    for (size_t i : chain) {
      if (!IsBaseKind(edges[i].kind)) continue;
      sum += edge_sim[i];
      ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  }
};

struct Expansion {
  std::vector<Scored> next;
  std::vector<Scored> cycles;
};

void Expand(const std::vector<Scored>& beam, size_t lo, size_t hi,
            const std::vector<std::vector<size_t>>& succ, const Scorer& scorer,
            const BeamOptions& options, Expansion& out) {
  for (size_t b = lo; b < hi; ++b) {
    const auto& chain = beam[b].edges;
    size_t last = chain.back();
    for (size_t j : succ[last]) {
      if (j == chain.front()) {
        out.cycles.push_back(beam[b]);
        continue;
      }
      if (std::find(chain.begin(), chain.end(), j) != chain.end()) continue;
      if (chain.size() >= options.max_depth) continue;
      std::vector<size_t> grown = chain;
      grown.push_back(j);
      if (options.max_delay_injections &&
          DelayInjections(scorer.edges, grown) > *options.max_delay_injections) {
        continue;
      }
      double score = scorer.Score(grown);
      out.next.push_back({std::move(grown), score});
    }
  }
}

void SortUnique(std::vector<Scored>& xs) {
  std::sort(xs.begin(), xs.end(), Before);
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](const Scored& a, const Scored& b) { return a.edges == b.edges; }),
           xs.end());
}

// Rotates a closed chain to start at its smallest base-edge index.
std::vector<size_t> RotateToMin(const std::vector<CausalEdge>& edges,
                                const std::vector<size_t>& chain) {
  size_t at = 0;
  for (size_t k = 0; k < chain.size(); ++k) {
    if (IsBaseKind(edges[chain[k]].kind) && chain[k] < chain[at]) at = k;
  }
  std::vector<size_t> out(chain.begin() + static_cast<std::ptrdiff_t>(at), chain.end());
  out.insert(out.end(), chain.begin(), chain.begin() + static_cast<std::ptrdiff_t>(at));
  return out;
}

Chain ToChain(const Scored& s, const std::vector<CausalEdge>& edges,
              const std::vector<FaultCluster>& clusters) {
  Chain c;
  c.edges = s.edges;
  c.score = s.score;
  for (size_t i : s.edges) {
    if (!IsBaseKind(edges[i].kind)) continue;
    const FaultCluster* cl = ClusterOf(clusters, edges[i].origin);
    c.signature.push_back(cl ? cl->id : edges[i].origin);
  }
  return c;
}

}  // namespace

CycleReport BeamSearch(const std::vector<CausalEdge>& edges,
                       const std::vector<FaultCluster>& clusters,
                       const BeamOptions& options) {
  CycleReport report;
  const auto succ = BuildSuccessors(edges);
  const Scorer scorer(edges, clusters);
  std::vector<Scored> beam;
  for (size_t i = 0; i < edges.size(); ++i) {
    if (!IsBaseKind(edges[i].kind)) continue;
    std::vector<size_t> chain{i};
    if (options.max_delay_injections &&
        DelayInjections(edges, chain) > *options.max_delay_injections) {
      continue;
    }
    beam.push_back({chain, scorer.Score(chain)});
  }
  SortUnique(beam);
  if (beam.size() > options.beam_size) beam.resize(options.beam_size);

  std::vector<Scored> cycles;
  const size_t workers = std::max<size_t>(1, options.workers);
  while (!beam.empty()) {
    ++report.levels;
    std::vector<Expansion> parts(std::min(workers, beam.size()));
    const size_t per = (beam.size() + parts.size() - 1) / parts.size();
    if (parts.size() == 1) {
      Expand(beam, 0, beam.size(), succ, scorer, options, parts[0]);
    } else {
      std::vector<std::thread> threads;
      for (size_t p = 0; p < parts.size(); ++p) {
        size_t lo = p * per;
        size_t hi = std::min(beam.size(), lo + per);
        threads.emplace_back([&, lo, hi, p] {
          Expand(beam, lo, hi, succ, scorer, options, parts[p]);
        });
      }
      for (auto& t : threads) t.join();
    }
    std::vector<Scored> next;
    for (auto& part : parts) {
      next.insert(next.end(), std::make_move_iterator(part.next.begin()),
                  std::make_move_iterator(part.next.end()));
      cycles.insert(cycles.end(), part.cycles.begin(), part.cycles.end());
    }
    SortUnique(next);
    if (next.size() > options.beam_size) next.resize(options.beam_size);
    beam = std::move(next);
  }
  for (auto& c : cycles) c.edges = RotateToMin(edges, c.edges);
  SortUnique(cycles);
  for (const auto& c : cycles) report.cycles.push_back(ToChain(c, edges, clusters));
  return report;
}

std::vector<std::string> CanonicalRotation(const std::vector<std::string>& sig) {
  std::vector<std::string> best = sig;
  for (size_t r = 1; r < sig.size(); ++r) {
    std::vector<std::string> rot(sig.begin() + static_cast<std::ptrdiff_t>(r), sig.end());
    rot.insert(rot.end(), sig.begin(), sig.begin() + static_cast<std::ptrdiff_t>(r));
    best = std::min(best, rot);
  }
  return best;
}

std::vector<CycleCluster> ClusterCycles(const std::vector<Chain>& cycles) {
  std::map<std::vector<std::string>, CycleCluster> groups;
  for (const auto& c : cycles) {
    auto sig = CanonicalRotation(c.signature);
    auto& g = groups[sig];
    g.signature = sig;
    g.members.push_back(c);
  }
  std::vector<CycleCluster> out;
  for (auto& [sig, g] : groups) {
    std::sort(g.members.begin(), g.members.end(), [](const Chain& a, const Chain& b) {
      if (a.score != b.score) return a.score < b.score;
      return a.edges < b.edges;
    });
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const CycleCluster& a, const CycleCluster& b) {
    const Chain& x = a.members.front();
    const Chain& y = b.members.front();
    if (x.score != y.score) return x.score < y.score;
    return a.signature < b.signature;
  });
  return out;
}

bool ValidateCycle(const std::vector<CausalEdge>& edges, const Chain& cycle) {
  if (cycle.edges.empty()) return false;
  if (!IsBaseKind(edges[cycle.edges.front()].kind)) return false;
  for (size_t k = 0; k < cycle.edges.size(); ++k) {
    const auto& a = edges[cycle.edges[k]];
    const auto& b = edges[cycle.edges[(k + 1) % cycle.edges.size()]];
    if (!Stitch(a, b).ok) return false;
  }
  return true;
}

}  // namespace cascadelab

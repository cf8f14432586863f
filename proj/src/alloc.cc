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

#include "cascadelab/alloc.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cascadelab {

void CorpusStats::Add(const InterferenceReport& report) {
  ++n;
  for (const auto& id : report.FaultIds()) ++n_f[id];
}

int64_t CorpusStats::Count(const std::string& fault) const {
  auto it = n_f.find(fault);
  return it == n_f.end() ? 0 : it->second;
}

double Idf(const std::string& fault, const CorpusStats& stats) {
  return std::log((1.0 + static_cast<double>(stats.n)) /
                  (1.0 + static_cast<double>(stats.Count(fault))));
}

InterferenceVector Vectorize(const std::vector<std::string>& triggered,
                             const std::vector<std::string>& universe,
                             const CorpusStats& stats) {
  InterferenceVector v(universe.size(), 0.0);
  std::set<std::string> hit(triggered.begin(), triggered.end());
  double norm = 0;
  for (size_t i = 0; i < universe.size(); ++i) {
    if (hit.count(universe[i])) {
      v[i] = Idf(universe[i], stats);
      norm += v[i] * v[i];
    }
  }
  if (norm == 0) return InterferenceVector(universe.size(), 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

bool IsZero(const InterferenceVector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double CosineDistance(const InterferenceVector& a, const InterferenceVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
  }
  for (double x : a) na += x * x;
  for (double x : b) nb += x * x;
  if (na == 0 || nb == 0) return 1.0;
  double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(d, 0.0, 1.0);
}

std::vector<std::vector<std::string>> AgglomerativeCluster(
    const std::vector<std::pair<std::string, InterferenceVector>>& vectors,
    double tau) {
  const size_t n = vectors.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      dist[i][j] = dist[j][i] = CosineDistance(vectors[i].second, vectors[j].second);
    }
  }
  std::vector<std::vector<size_t>> groups;
  for (size_t i = 0; i < n; ++i) groups.push_back({i});
  auto min_name = [&](const std::vector<size_t>& g) {
    std::string best = vectors[g[0]].first;
    for (size_t i : g) best = std::min(best, vectors[i].first);
    return best;
  };
  while (groups.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> best_key;
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < groups.size(); ++i) {
      for (size_t j = i + 1; j < groups.size(); ++j) {
        double sum = 0;
        for (size_t a : groups[i]) {
          for (size_t b : groups[j]) sum += dist[a][b];
        }
        double avg = sum / static_cast<double>(groups[i].size() * groups[j].size());
        std::string a = min_name(groups[i]);
        std::string b = min_name(groups[j]);
        std::pair<std::string, std::string> key =
            a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        if (avg < best || (avg == best && key < best_key)) {
          best = avg;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    }
    if (best > tau) break;
    groups[bi].insert(groups[bi].end(), groups[bj].begin(), groups[bj].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& g : groups) {
    std::vector<std::string> names;
    for (size_t i : g) names.push_back(vectors[i].first);
    std::sort(names.begin(), names.end());
    out.push_back(std::move(names));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<FaultCluster> ClusterPhase1(
    const std::vector<std::pair<std::string, InterferenceVector>>& vectors,
    double tau) {
  std::vector<FaultCluster> clusters;
  for (auto& members : AgglomerativeCluster(vectors, tau)) {
    FaultCluster c;
    c.id = "G" + std::to_string(clusters.size());
    c.members = std::move(members);
    clusters.push_back(std::move(c));
  }
  return clusters;
}

double SimScore(const FaultCluster& cluster,
                const std::vector<ExperimentRecord>& records) {
  std::set<std::string> members(cluster.members.begin(), cluster.members.end());
  std::vector<const ExperimentRecord*> mine;
  for (const auto& r : records) {
    if (members.count(r.fault)) mine.push_back(&r);
  }
  if (cluster.non_impactful &&
      std::all_of(mine.begin(), mine.end(),
                  [](const ExperimentRecord* r) { return IsZero(r->vector); })) {
    return 1.0;
  }
  double sum = 0;
  int64_t pairs = 0;
  for (size_t i = 0; i < mine.size(); ++i) {
    for (size_t j = i + 1; j < mine.size(); ++j) {
      if (mine[i]->fault == mine[j]->fault) continue;
      sum += CosineDistance(mine[i]->vector, mine[j]->vector);
      ++pairs;
    }
  }
  if (pairs == 0) return 1.0;
  return 1.0 - sum / static_cast<double>(pairs);
}

double Weight(double sim_score, double epsilon) {
  return std::max(epsilon, 1.0 - sim_score);
}

BudgetLedger BudgetLedger::Create(size_t num_faults, int64_t multiplier) {
  BudgetLedger ledger;
  ledger.total = multiplier * static_cast<int64_t>(num_faults);
  ledger.quota[0] = ledger.total / 4;
  ledger.quota[2] = ledger.total / 4;
  ledger.quota[1] = ledger.total - ledger.quota[0] - ledger.quota[2];
  return ledger;
}

std::map<std::string, int64_t> BudgetLedger::NetFlows() const {
  std::map<std::string, int64_t> flows;
  for (const auto& t : transfers) {
    flows[t.from] -= t.amount;
    flows[t.to] += t.amount;
  }
  return flows;
}

void BudgetLedger::Log(int phase, const std::string& from, const std::string& to,
                       int64_t amount) {
  if (amount == 0) return;
  transfers.push_back({phase, from, to, amount});
}

std::vector<ScheduledExperiment> SchedulePhase1(
    const std::vector<FaultPoint>& faults, const Reachability& reach,
    const std::map<std::string, int64_t>& coverage, BudgetLedger& ledger,
    std::vector<std::string>* unreachable) {
  std::vector<ScheduledExperiment> out;
  int64_t budget = ledger.quota[0];
  for (const auto& f : faults) {
    auto it = reach.find(f.id);
    if (it == reach.end() || it->second.empty()) {
      if (unreachable) unreachable->push_back(f.id);
      continue;
    }
    if (budget == 0) continue;
    std::string best;
    int64_t best_cov = -1;
    for (const auto& t : it->second) {  // Sorted, so ties keep the first name.
      auto c = coverage.find(t);
      int64_t cov = c == coverage.end() ? 0 : c->second;
      if (cov > best_cov) {
        best_cov = cov;
        best = t;
      }
    }
    out.push_back({f.id, best, 1, ""});
    --budget;
    ++ledger.spent[0];
    ++ledger.spent_per_cluster["phase1"];
  }
  ledger.carry[1] = budget;
  ledger.Log(1, "phase1", "phase2", budget);
  return out;
}

std::vector<FaultCluster> BuildClusters(
    const std::vector<FaultPoint>& faults,
    const std::vector<ExperimentRecord>& phase1, double tau) {
  std::vector<std::pair<std::string, InterferenceVector>> impactful;
  std::vector<std::string> rest;
  for (const auto& f : faults) {
    const ExperimentRecord* rec = nullptr;
    for (const auto& r : phase1) {
      if (r.fault == f.id) rec = &r;
    }
    if (rec && !IsZero(rec->vector)) {
      impactful.emplace_back(f.id, rec->vector);
    } else {
      rest.push_back(f.id);
    }
  }
  std::vector<FaultCluster> clusters = ClusterPhase1(impactful, tau);
  if (!rest.empty()) {
    FaultCluster c;
    c.id = "G" + std::to_string(clusters.size());
    std::sort(rest.begin(), rest.end());
    c.members = std::move(rest);
    c.non_impactful = true;
    clusters.push_back(std::move(c));
  }
  return clusters;
}

namespace {

std::mt19937_64 PhaseRng(uint64_t seed, int phase) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(phase), 0x33a7u};
  return std::mt19937_64(seq);
}

// Open (fault, test) pairs of a cluster, grouped by fault.
std::vector<std::pair<std::string, std::vector<std::string>>> Open(
    const FaultCluster& c, const Reachability& reach, const UsedPairs& used) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  for (const auto& f : c.members) {
    auto it = reach.find(f);
    if (it == reach.end()) continue;
    std::vector<std::string> tests;
    for (const auto& t : it->second) {
      if (!used.count({f, t})) tests.push_back(t);
    }
    if (!tests.empty()) out.emplace_back(f, std::move(tests));
  }
  return out;
}

bool HasCapacity(const FaultCluster& c, const Reachability& reach,
                 const UsedPairs& used) {
  return !Open(c, reach, used).empty();
}

template <typename T>
const T& Pick(const std::vector<T>& xs, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> d(0, xs.size() - 1);
  return xs[d(rng)];
}

ScheduledExperiment SpendIn(const FaultCluster& c, int phase,
                            const Reachability& reach, UsedPairs& used,
                            BudgetLedger& ledger, std::mt19937_64& rng) {
  auto open = Open(c, reach, used);
  const auto& [fault, tests] = Pick(open, rng);
  std::string test = Pick(tests, rng);
  used.insert({fault, test});
  ++ledger.spent[phase - 1];
  ++ledger.spent_per_cluster[c.id];
  return {fault, test, phase, c.id};
}

}  // namespace

std::vector<ScheduledExperiment> SchedulePhase2(
    const std::vector<FaultCluster>& clusters, const Reachability& reach,
    UsedPairs& used, BudgetLedger& ledger, uint64_t seed) {
  std::vector<ScheduledExperiment> out;
  auto rng = PhaseRng(seed, 2);
  const int64_t budget = ledger.quota[1] + ledger.carry[1];
  const size_t k = clusters.size();
  if (k == 0) {
    ledger.carry[2] = budget;
    ledger.Log(2, "phase2", "phase3", budget);
    return out;
  }
  std::vector<int64_t> alloc(k, budget / static_cast<int64_t>(k));
  for (size_t i = 0; i < static_cast<size_t>(budget % static_cast<int64_t>(k)); ++i) {
    ++alloc[i];
  }
  for (size_t i = 0; i < k; ++i) ledger.Log(2, "phase2", clusters[i].id, alloc[i]);
  int64_t leftover = 0;
  bool pending = true;
  while (pending) {
    pending = false;
    for (size_t i = 0; i < k; ++i) {
      if (alloc[i] == 0) continue;
      pending = true;
      if (HasCapacity(clusters[i], reach, used)) {
        out.push_back(SpendIn(clusters[i], 2, reach, used, ledger, rng));
        ledger.Log(2, clusters[i].id, "spent", 1);
        --alloc[i];
        continue;
      }
      std::vector<size_t> larger, any;
      for (size_t j = 0; j < k; ++j) {
        if (j == i || !HasCapacity(clusters[j], reach, used)) continue;
        any.push_back(j);
        if (clusters[j].members.size() > clusters[i].members.size()) larger.push_back(j);
      }
      if (!larger.empty() || !any.empty()) {
        size_t j = Pick(larger.empty() ? any : larger, rng);
        ledger.Log(2, clusters[i].id, clusters[j].id, alloc[i]);
        alloc[j] += alloc[i];
      } else {
        ledger.Log(2, clusters[i].id, "phase3", alloc[i]);
        leftover += alloc[i];
      }
      alloc[i] = 0;
    }
  }
  ledger.carry[2] = leftover;
  return out;
}

std::vector<ScheduledExperiment> SchedulePhase3(
    const std::vector<FaultCluster>& clusters, const Reachability& reach,
    UsedPairs& used, BudgetLedger& ledger, uint64_t seed) {
  std::vector<ScheduledExperiment> out;
  const int64_t budget = ledger.quota[2] + ledger.carry[2];
  if (clusters.empty()) {
    ledger.unspent += budget;
    ledger.Log(3, "phase3", "unspent", budget);
    return out;
  }
  std::vector<double> weights;
  for (const auto& c : clusters) weights.push_back(c.weight);
  WeightedSampler sampler(weights, seed);
  auto rng = PhaseRng(seed, 3);
  for (int64_t q = 0; q < budget; ++q) {
    size_t i = sampler.Draw();
    ledger.Log(3, "phase3", clusters[i].id, 1);
    size_t target = i;
    if (!HasCapacity(clusters[i], reach, used)) {
      std::optional<size_t> below, top;
      for (size_t j = 0; j < clusters.size(); ++j) {
        if (j == i || !HasCapacity(clusters[j], reach, used)) continue;
        if (clusters[j].weight < clusters[i].weight &&
            (!below || clusters[j].weight > clusters[*below].weight)) {
          below = j;
        }
        if (!top || clusters[j].weight > clusters[*top].weight) top = j;
      }
      if (below || top) {
        target = below ? *below : *top;
        ledger.Log(3, clusters[i].id, clusters[target].id, 1);
      } else {
        ledger.Log(3, clusters[i].id, "unspent", 1);
        ++ledger.unspent;
        continue;
      }
    }
    out.push_back(SpendIn(clusters[target], 3, reach, used, ledger, rng));
    ledger.Log(3, clusters[target].id, "spent", 1);
  }
  return out;
}

CorpusStats Retrain(std::vector<ExperimentRecord>& records,
                    const std::vector<std::string>& universe) {
  CorpusStats stats;
  for (const auto& r : records) {
    for (const auto& sub : r.per_value) stats.Add(sub);
  }
  for (auto& r : records) {
    r.vector = Vectorize(r.report.FaultIds(), universe, stats);
  }
  return stats;
}

void ScoreClusters(std::vector<FaultCluster>& clusters,
                   const std::vector<ExperimentRecord>& records, double epsilon) {
  for (auto& c : clusters) {
    c.sim_score = SimScore(c, records);
    c.weight = Weight(*c.sim_score, epsilon);
  }
}

const FaultCluster* ClusterOf(const std::vector<FaultCluster>& clusters,
                              const std::string& fault) {
  for (const auto& c : clusters) {
    if (std::binary_search(c.members.begin(), c.members.end(), fault)) return &c;
  }
  return nullptr;
}

WeightedSampler::WeightedSampler(const std::vector<double>& weights, uint64_t seed)
    : rng_(PhaseRng(seed, 30)), dist_(weights.begin(), weights.end()) {}

size_t WeightedSampler::Draw() { return dist_(rng_); }

PhaseOneResult RunPhase1(const std::vector<FaultPoint>& faults,
                         const Reachability& reach,
                         const std::map<std::string, int64_t>& coverage,
                         BudgetLedger& ledger, UsedPairs& used,
                         const ExperimentRunner& run, double tau) {
  PhaseOneResult result;
  auto schedule = SchedulePhase1(faults, reach, coverage, ledger, &result.unreachable);
  for (const auto& s : schedule) {
    used.insert({s.fault, s.test});
    result.records.push_back(run(s));
  }
  std::vector<std::string> universe;
  for (const auto& f : faults) universe.push_back(f.id);
  Retrain(result.records, universe);
  result.clusters = BuildClusters(faults, result.records, tau);
  return result;
}

std::vector<ExperimentRecord> RunPhase2(std::vector<FaultCluster>& clusters,
                                        std::vector<ExperimentRecord>& records,
                                        const std::vector<std::string>& universe,
                                        const Reachability& reach, UsedPairs& used,
                                        BudgetLedger& ledger, uint64_t seed,
                                        const ExperimentRunner& run, double epsilon) {
  auto schedule = SchedulePhase2(clusters, reach, used, ledger, seed);
  std::vector<ExperimentRecord> fresh;
  for (const auto& s : schedule) fresh.push_back(run(s));
  records.insert(records.end(), fresh.begin(), fresh.end());
  Retrain(records, universe);
  ScoreClusters(clusters, records, epsilon);
  return fresh;
}

std::vector<ExperimentRecord> RunPhase3(const std::vector<FaultCluster>& clusters,
                                        const Reachability& reach, UsedPairs& used,
                                        BudgetLedger& ledger, uint64_t seed,
                                        const ExperimentRunner& run) {
  auto schedule = SchedulePhase3(clusters, reach, used, ledger, seed);
  std::vector<ExperimentRecord> fresh;
  for (const auto& s : schedule) fresh.push_back(run(s));
  return fresh;
}

}  // namespace cascadelab

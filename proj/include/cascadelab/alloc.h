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
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cascadelab/fca.h"
#include "cascadelab/scenario.h"

namespace cascadelab {

inline constexpr double kDefaultEpsilon = 0.01;
inline constexpr double kDefaultTau = 0.5;

struct CorpusStats {
  int64_t n = 0;
  std::map<std::string, int64_t> n_f;

  // Counts one experiment: bumps N and N_f for every fault in the report.
  void Add(const InterferenceReport& report);
  int64_t Count(const std::string& fault) const;
};

double Idf(const std::string& fault, const CorpusStats& stats);

using InterferenceVector = std::vector<double>;

// `universe` fixes the vector layout (one slot per fault id).
InterferenceVector Vectorize(const std::vector<std::string>& triggered,
                             const std::vector<std::string>& universe,
                             const CorpusStats& stats);

bool IsZero(const InterferenceVector& v);

// Zero vectors are at distance 1 from everything.
double CosineDistance(const InterferenceVector& a, const InterferenceVector& b);

struct FaultCluster {
  std::string id;
  std::vector<std::string> members;  // Sorted.
  std::optional<double> sim_score;
  double weight = 1.0;
  // Faults whose first injection triggered nothing, or that no test reaches.
  bool non_impactful = false;
};

// Average-linkage agglomerative clustering; merges while the closest pair of
// clusters is within `tau`. Returns member groups ordered by smallest id.
std::vector<std::vector<std::string>> AgglomerativeCluster(
    const std::vector<std::pair<std::string, InterferenceVector>>& vectors,
    double tau);

std::vector<FaultCluster> ClusterPhase1(
    const std::vector<std::pair<std::string, InterferenceVector>>& vectors,
    double tau);

struct ExperimentRecord {
  std::string fault;
  std::string test;
  int phase = 0;
  // One report per delay value for delay faults, else a single report.
  std::vector<InterferenceReport> per_value;
  InterferenceReport report;
  InterferenceVector vector;
};

// 1 - mean cosine distance over record pairs with differing faults; 1 when
// no such pair exists.
double SimScore(const FaultCluster& cluster,
                const std::vector<ExperimentRecord>& records);

double Weight(double sim_score, double epsilon = kDefaultEpsilon);

struct Transfer {
  int phase = 0;
  std::string from;
  std::string to;
  int64_t amount = 0;
};

struct BudgetLedger {
  int64_t total = 0;
  int64_t quota[3] = {0, 0, 0};
  int64_t spent[3] = {0, 0, 0};
  // Quota carried into a phase from the previous one.
  int64_t carry[3] = {0, 0, 0};
  std::map<std::string, int64_t> spent_per_cluster;
  std::vector<Transfer> transfers;
  int64_t unspent = 0;

  // total = multiplier x faults; floor per phase, remainder to phase two.
  static BudgetLedger Create(size_t num_faults, int64_t multiplier = 4);

  int64_t TotalSpent() const { return spent[0] + spent[1] + spent[2]; }
  // Net flow per account across all transfers; sums to zero.
  std::map<std::string, int64_t> NetFlows() const;
  void Log(int phase, const std::string& from, const std::string& to,
           int64_t amount);
};

struct ScheduledExperiment {
  std::string fault;
  std::string test;
  int phase = 0;
  std::string cluster;
};

using Reachability = std::map<std::string, std::set<std::string>>;
using UsedPairs = std::set<std::pair<std::string, std::string>>;

// Phase one: each reachable fault once, in its highest-coverage test.
std::vector<ScheduledExperiment> SchedulePhase1(
    const std::vector<FaultPoint>& faults, const Reachability& reach,
    const std::map<std::string, int64_t>& coverage, BudgetLedger& ledger,
    std::vector<std::string>* unreachable);

// Clusters from phase-one records. Faults with no record or an empty report
// share one trailing non-impactful cluster.
std::vector<FaultCluster> BuildClusters(
    const std::vector<FaultPoint>& faults,
    const std::vector<ExperimentRecord>& phase1, double tau);

// Phase two: round-robin over clusters with quota transfer on exhaustion.
std::vector<ScheduledExperiment> SchedulePhase2(
    const std::vector<FaultCluster>& clusters, const Reachability& reach,
    UsedPairs& used, BudgetLedger& ledger, uint64_t seed);

// Phase three: weighted draws; unusable quota moves to lower weights.
std::vector<ScheduledExperiment> SchedulePhase3(
    const std::vector<FaultCluster>& clusters, const Reachability& reach,
    UsedPairs& used, BudgetLedger& ledger, uint64_t seed);

// Recomputes IDF over `records`, re-vectorizes them in place.
CorpusStats Retrain(std::vector<ExperimentRecord>& records,
                    const std::vector<std::string>& universe);

// Sets sim_score and weight on every cluster.
void ScoreClusters(std::vector<FaultCluster>& clusters,
                   const std::vector<ExperimentRecord>& records,
                   double epsilon = kDefaultEpsilon);

const FaultCluster* ClusterOf(const std::vector<FaultCluster>& clusters,
                              const std::string& fault);

// Categorical sampler over cluster weights.
class WeightedSampler {
 public:
  WeightedSampler(const std::vector<double>& weights, uint64_t seed);
  size_t Draw();

 private:
  std::mt19937_64 rng_;
  std::discrete_distribution<size_t> dist_;
};

using ExperimentRunner = std::function<ExperimentRecord(const ScheduledExperiment&)>;

struct PhaseOneResult {
  std::vector<ExperimentRecord> records;
  std::vector<FaultCluster> clusters;
  std::vector<std::string> unreachable;
};

PhaseOneResult RunPhase1(const std::vector<FaultPoint>& faults,
                         const Reachability& reach,
                         const std::map<std::string, int64_t>& coverage,
                         BudgetLedger& ledger, UsedPairs& used,
                         const ExperimentRunner& run, double tau = kDefaultTau);

// Runs phase two, retrains IDF over all records and scores the clusters.
std::vector<ExperimentRecord> RunPhase2(std::vector<FaultCluster>& clusters,
                                        std::vector<ExperimentRecord>& records,
                                        const std::vector<std::string>& universe,
                                        const Reachability& reach, UsedPairs& used,
                                        BudgetLedger& ledger, uint64_t seed,
                                        const ExperimentRunner& run,
                                        double epsilon = kDefaultEpsilon);

std::vector<ExperimentRecord> RunPhase3(const std::vector<FaultCluster>& clusters,
                                        const Reachability& reach, UsedPairs& used,
                                        BudgetLedger& ledger, uint64_t seed,
                                        const ExperimentRunner& run);

}  // namespace cascadelab

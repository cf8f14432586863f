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

#include "cascadelab/campaign.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cascadelab/alloc.h"
#include "cascadelab/beam.h"
#include "cascadelab/experiment.h"
#include "cascadelab/fault_points.h"
#include "cascadelab/fca.h"
#include "cascadelab/scenario_parser.h"
#include "cascadelab/stitch.h"
#include "cascadelab/trace_archive.h"
#include "json.hpp"

namespace cascadelab {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void CampaignConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw CampaignError("config", msg); };
  if (scenario_path.empty()) fail("scenario path is required");
  if (budget_multiplier < 1) fail("budget-multiplier must be >= 1");
  if (!(epsilon > 0 && epsilon <= 1)) fail("epsilon must be in (0, 1]");
  if (!(tau >= 0 && tau <= 1)) fail("tau must be in [0, 1]");
  if (!(p_value > 0 && p_value < 1)) fail("p-value must be in (0, 1)");
  if (delay_values.empty()) fail("delay-values must be non-empty");
  for (size_t i = 0; i < delay_values.size(); ++i) {
    if (delay_values[i] <= 0) fail("delay-values must be positive");
    if (i > 0 && delay_values[i] <= delay_values[i - 1]) {
      fail("delay-values must be strictly ascending");
    }
  }
  if (timeout_min <= 0 || timeout_max < timeout_min) fail("timeout range is invalid");
  if (beam_size == 0) fail("beam-size must be >= 1");
  if (max_depth == 0) fail("max-depth must be >= 1");
  if (workers == 0) fail("workers must be >= 1");
  if (output_dir.empty()) fail("output directory is required");
}

int CampaignExitCode(const DetectSummary& summary) {
  return summary.cycle_clusters > 0 ? 0 : 1;
}

namespace {

struct Loaded {
  Scenario scenario;
  std::vector<FaultPoint> faults;
  std::vector<std::string> universe;
};

Loaded Load(const CampaignConfig& config, const std::string& stage) {
  config.Validate();
  Loaded l;
  try {
    l.scenario = ClampTimeouts(LoadScenarioFile(config.scenario_path),
                               config.timeout_min, config.timeout_max);
  } catch (const ScenarioError& e) {
    throw CampaignError(stage, e.what());
  }
  l.faults = EnumerateFaultPoints(l.scenario);
  for (const auto& f : l.faults) l.universe.push_back(f.id);
  return l;
}

fs::path Path(const CampaignConfig& config, const std::string& name) {
  return fs::path(config.output_dir) / name;
}

std::string PhaseFile(int phase, const std::string& suffix) {
  return "phase" + std::to_string(phase) + "." + suffix;
}

void WriteText(const CampaignConfig& config, const std::string& name,
               const std::string& text) {
  fs::create_directories(config.output_dir);
  fs::path target = Path(config, name);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CampaignError("io", "cannot write " + target.string());
    out << text;
  }
  fs::rename(tmp, target);
}

std::string ReadText(const CampaignConfig& config, const std::string& name,
                     const std::string& stage) {
  std::ifstream in(Path(config, name), std::ios::binary);
  if (!in) {
    throw CampaignError(stage, "missing artifact " + Path(config, name).string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json ReadJson(const CampaignConfig& config, const std::string& name,
              const std::string& stage, const std::string& format) {
  Json j;
  try {
    j = Json::parse(ReadText(config, name, stage));
  } catch (const nlohmann::json::exception& e) {
    throw CampaignError(stage, name + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != format) {
    throw CampaignError(stage, name + ": expected format '" + format + "'");
  }
  return j;
}

void WriteJson(const CampaignConfig& config, const std::string& name, const Json& j) {
  WriteText(config, name, j.dump(2) + "\n");
}

std::vector<RunTrace> ReadTraces(const CampaignConfig& config, const std::string& name,
                                 const std::string& stage) {
  std::istringstream in(ReadText(config, name, stage));
  try {
    return ReadTraceArchive(in);
  } catch (const ArchiveError& e) {
    throw CampaignError(stage, name + ": " + e.what());
  }
}

// Artifact formats.
constexpr const char* kCoverageFormat = "cascadelab-coverage v1";
constexpr const char* kReachFormat = "cascadelab-reachability v1";
constexpr const char* kScheduleFormat = "cascadelab-schedule v1";
constexpr const char* kLedgerFormat = "cascadelab-ledger v1";
constexpr const char* kRecordsFormat = "cascadelab-records v1";
constexpr const char* kClustersFormat = "cascadelab-clusters v1";
constexpr const char* kBaselineFormat = "cascadelab-baseline v1";

Reachability LoadReach(const CampaignConfig& config, const std::string& stage) {
  Json j = ReadJson(config, "reachability.json", stage, kReachFormat);
  Reachability reach;
  for (const auto& [fault, tests] : j["faults"].items()) {
    for (const auto& t : tests) reach[fault].insert(t.get<std::string>());
  }
  return reach;
}

Json LedgerToJson(const BudgetLedger& l) {
  Json j;
  j["format"] = kLedgerFormat;
  j["total"] = l.total;
  j["quota"] = {l.quota[0], l.quota[1], l.quota[2]};
  j["spent"] = {l.spent[0], l.spent[1], l.spent[2]};
  j["carry"] = {l.carry[0], l.carry[1], l.carry[2]};
  j["unspent"] = l.unspent;
  j["spent_per_cluster"] = l.spent_per_cluster;
  Json tr = Json::array();
  for (const auto& t : l.transfers) {
    tr.push_back({{"phase", t.phase}, {"from", t.from}, {"to", t.to}, {"amount", t.amount}});
  }
  j["transfers"] = tr;
  return j;
}

BudgetLedger LedgerFromJson(const Json& j) {
  BudgetLedger l;
  l.total = j["total"].get<int64_t>();
  for (int i = 0; i < 3; ++i) {
    l.quota[i] = j["quota"][i].get<int64_t>();
    l.spent[i] = j["spent"][i].get<int64_t>();
    l.carry[i] = j["carry"][i].get<int64_t>();
  }
  l.unspent = j["unspent"].get<int64_t>();
  l.spent_per_cluster = j["spent_per_cluster"].get<std::map<std::string, int64_t>>();
  for (const auto& t : j["transfers"]) {
    l.transfers.push_back({t["phase"].get<int>(), t["from"].get<std::string>(),
                           t["to"].get<std::string>(), t["amount"].get<int64_t>()});
  }
  return l;
}

// Drops what phases >= `phase` recorded, so a phase can be rescheduled.
void RewindLedger(BudgetLedger& l, int phase) {
  for (int k = phase - 1; k < 3; ++k) l.spent[k] = 0;
  for (int k = phase; k < 3; ++k) l.carry[k] = 0;
  l.unspent = 0;
  l.transfers.erase(std::remove_if(l.transfers.begin(), l.transfers.end(),
                                   [&](const Transfer& t) { return t.phase >= phase; }),
                    l.transfers.end());
  l.spent_per_cluster.clear();
  if (l.spent[0] > 0) l.spent_per_cluster["phase1"] = l.spent[0];
  for (const auto& t : l.transfers) {
    if (t.to == "spent") l.spent_per_cluster[t.from] += t.amount;
  }
}

Json ScheduleToJson(int phase, const std::vector<ScheduledExperiment>& s) {
  Json j;
  j["format"] = kScheduleFormat;
  j["phase"] = phase;
  Json arr = Json::array();
  for (const auto& e : s) {
    arr.push_back({{"fault", e.fault}, {"test", e.test}, {"cluster", e.cluster}});
  }
  j["experiments"] = arr;
  return j;
}

std::vector<ScheduledExperiment> LoadSchedule(const CampaignConfig& config, int phase,
                                              const std::string& stage) {
  Json j = ReadJson(config, PhaseFile(phase, "schedule.json"), stage, kScheduleFormat);
  std::vector<ScheduledExperiment> out;
  for (const auto& e : j["experiments"]) {
    out.push_back({e["fault"].get<std::string>(), e["test"].get<std::string>(), phase,
                   e["cluster"].get<std::string>()});
  }
  return out;
}

UsedPairs UsedBefore(const CampaignConfig& config, int phase, const std::string& stage) {
  UsedPairs used;
  for (int k = 1; k < phase; ++k) {
    for (const auto& e : LoadSchedule(config, k, stage)) used.insert({e.fault, e.test});
  }
  return used;
}

Json ClustersToJson(const std::vector<FaultCluster>& clusters,
                    const std::vector<std::string>& unreachable) {
  Json j;
  j["format"] = kClustersFormat;
  Json arr = Json::array();
  for (const auto& c : clusters) {
    Json cj;
    cj["id"] = c.id;
    cj["members"] = c.members;
    cj["non_impactful"] = c.non_impactful;
    cj["sim_score"] = c.sim_score ? Json(*c.sim_score) : Json(nullptr);
    cj["weight"] = c.weight;
    arr.push_back(cj);
  }
  j["clusters"] = arr;
  j["unreachable"] = unreachable;
  return j;
}

std::vector<FaultCluster> LoadClusters(const CampaignConfig& config, const std::string& stage,
                                       std::vector<std::string>* unreachable = nullptr) {
  Json j = ReadJson(config, "clusters.json", stage, kClustersFormat);
  std::vector<FaultCluster> out;
  for (const auto& cj : j["clusters"]) {
    FaultCluster c;
    c.id = cj["id"].get<std::string>();
    c.members = cj["members"].get<std::vector<std::string>>();
    c.non_impactful = cj["non_impactful"].get<bool>();
    if (!cj["sim_score"].is_null()) c.sim_score = cj["sim_score"].get<double>();
    c.weight = cj["weight"].get<double>();
    out.push_back(std::move(c));
  }
  if (unreachable) *unreachable = j["unreachable"].get<std::vector<std::string>>();
  return out;
}

Json RecordsToJson(int phase, const std::vector<ExperimentRecord>& records) {
  Json j;
  j["format"] = kRecordsFormat;
  j["phase"] = phase;
  Json arr = Json::array();
  for (const auto& r : records) {
    Json rj;
    rj["fault"] = r.fault;
    rj["test"] = r.test;
    rj["target_reached"] = r.report.target_reached;
    Json per = Json::array();
    for (const auto& sub : r.per_value) {
      per.push_back({{"delay", sub.delay_values.empty() ? 0 : sub.delay_values.front()},
                     {"faults", sub.FaultIds()}});
    }
    rj["per_value"] = per;
    rj["faults"] = r.report.FaultIds();
    arr.push_back(rj);
  }
  j["records"] = arr;
  return j;
}

InterferenceReport IdsReport(const std::string& fault, const std::string& test,
                             const std::vector<std::string>& ids) {
  InterferenceReport rep;
  rep.injected = fault;
  rep.test = test;
  for (const auto& id : ids) {
    AdditionalFault a;
    a.fault_id = id;
    rep.additional.push_back(a);
  }
  return rep;
}

std::vector<ExperimentRecord> LoadRecords(const CampaignConfig& config, int phase,
                                          const std::string& stage) {
  Json j = ReadJson(config, PhaseFile(phase, "records.json"), stage, kRecordsFormat);
  std::vector<ExperimentRecord> out;
  for (const auto& rj : j["records"]) {
    ExperimentRecord r;
    r.fault = rj["fault"].get<std::string>();
    r.test = rj["test"].get<std::string>();
    r.phase = phase;
    for (const auto& sub : rj["per_value"]) {
      r.per_value.push_back(
          IdsReport(r.fault, r.test, sub["faults"].get<std::vector<std::string>>()));
    }
    r.report = IdsReport(r.fault, r.test, rj["faults"].get<std::vector<std::string>>());
    r.report.target_reached = rj["target_reached"].get<bool>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CausalEdge> LoadEdges(const CampaignConfig& config, int phase,
                                  const std::string& stage) {
  std::istringstream in(ReadText(config, PhaseFile(phase, "edges"), stage));
  try {
    return ReadEdgeArchive(in);
  } catch (const FcaError& e) {
    throw CampaignError(stage, e.what());
  }
}

// Runs `work(i)` for i in [0, n) on up to `workers` threads.
template <typename F>
void ParallelFor(size_t n, size_t workers, F work) {
  workers = std::max<size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> threads;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::string ModeOf(const std::vector<FaultPoint>& faults, const std::string& id) {
  const FaultPoint* f = FindFault(faults, id);
  if (!f) return "none";
  switch (f->kind) {
    case FaultKind::kException:
      return "oneshot";
    case FaultKind::kLoopDelay:
      return "delay";
    case FaultKind::kNegation:
      return "negate";
  }
  return "none";
}

bool MatchesPlanted(const std::vector<PlantedEdge>& planted,
                    const std::vector<CausalEdge>& edges, const Chain& cycle) {
  if (planted.empty() || planted.size() != cycle.edges.size()) return false;
  const size_t n = planted.size();
  for (size_t r = 0; r < n; ++r) {
    bool all = true;
    for (size_t k = 0; k < n && all; ++k) {
      const auto& p = planted[k];
      const auto& e = edges[cycle.edges[(k + r) % n]];
      all = p.src == e.src && p.kind == EdgeKindName(e.kind) && p.dst == e.dst &&
            p.test == e.test;
    }
    if (all) return true;
  }
  return false;
}

std::string FormatScore(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string Narrate(const CausalEdge& e, const std::vector<FaultPoint>& faults) {
  std::string what;
  switch (e.kind) {
    case EdgeKind::kIcfg:
      return "the slowed loop " + e.src + " stretches its parent loop " + e.dst +
             " [ICFG; " + e.evidence + "]";
    case EdgeKind::kCfg:
      return "the stretched loop " + e.src + " delays the next loop " + e.dst +
             " [CFG; " + e.evidence + "]";
    default:
      break;
  }
  std::string mode = ModeOf(faults, e.src);
  std::string cause = mode == "delay"    ? "delaying loop " + e.src
                      : mode == "negate" ? "negating detector " + e.src
                                         : "throwing at " + e.src;
  const FaultPoint* dst = FindFault(faults, e.dst);
  std::string effect = !dst ? e.dst
                       : dst->kind == FaultKind::kLoopDelay
                           ? "more iterations of loop " + e.dst
                       : dst->kind == FaultKind::kNegation
                           ? "detector " + e.dst + " to report an error"
                           : "exception " + dst->exception + " at " + e.dst;
  return "in test " + e.test + ", " + cause + " causes " + effect + " [" +
         EdgeKindName(e.kind) + "; " + e.evidence + "]";
}

}  // namespace

ProfileSummary CmdProfile(const CampaignConfig& config) {
  const std::string stage = "profile";
  Loaded l = Load(config, stage);
  if (l.scenario.tests.empty()) {
    std::cerr << "warning: scenario '" << l.scenario.name << "' declares no tests\n";
  }
  std::vector<std::vector<RunTrace>> per_test(l.scenario.tests.size());
  ParallelFor(per_test.size(), config.workers, [&](size_t i) {
    per_test[i] = RunRepeated(l.scenario, l.scenario.tests[i], InjectionPlan::Profile(),
                              config.seed);
  });
  std::vector<RunTrace> profiles;
  for (auto& runs : per_test) {
    profiles.insert(profiles.end(), runs.begin(), runs.end());
  }
  WriteText(config, "profile.trace", TraceArchiveToString(profiles));

  Json cov;
  cov["format"] = kCoverageFormat;
  Json tests = Json::object();
  std::map<std::string, std::set<std::string>> covered;
  for (const auto& t : profiles) covered[t.test].insert(t.coverage.begin(), t.coverage.end());
  for (const auto& t : l.scenario.tests) {
    const auto& ids = covered[t.name];
    tests[t.name] = {{"statements", ids.size()},
                     {"covered", std::vector<std::string>(ids.begin(), ids.end())}};
  }
  cov["tests"] = tests;
  WriteJson(config, "coverage.json", cov);

  Json reach_json;
  reach_json["format"] = kReachFormat;
  Json faults = Json::object();
  auto reach = BuildReachability(l.scenario, l.faults, profiles);
  for (const auto& f : l.faults) {
    const auto& tests_for = reach[f.id];
    faults[f.id] = std::vector<std::string>(tests_for.begin(), tests_for.end());
  }
  reach_json["faults"] = faults;
  WriteJson(config, "reachability.json", reach_json);
  return {l.scenario.tests.size(), profiles.size()};
}

size_t CmdSchedule(const CampaignConfig& config, int phase) {
  const std::string stage = "schedule";
  if (phase < 1 || phase > 3) throw CampaignError(stage, "phase must be 1, 2 or 3");
  Loaded l = Load(config, stage);
  Reachability reach = LoadReach(config, stage);
  std::vector<ScheduledExperiment> schedule;
  if (phase == 1) {
    Json cov = ReadJson(config, "coverage.json", stage, kCoverageFormat);
    std::map<std::string, int64_t> sizes;
    for (const auto& [test, info] : cov["tests"].items()) {
      sizes[test] = info["statements"].get<int64_t>();
    }
    BudgetLedger ledger = BudgetLedger::Create(l.faults.size(), config.budget_multiplier);
    schedule = SchedulePhase1(l.faults, reach, sizes, ledger, nullptr);
    WriteJson(config, "ledger.json", LedgerToJson(ledger));
  } else {
    BudgetLedger ledger =
        LedgerFromJson(ReadJson(config, "ledger.json", stage, kLedgerFormat));
    RewindLedger(ledger, phase);
    auto clusters = LoadClusters(config, stage);
    UsedPairs used = UsedBefore(config, phase, stage);
    if (phase == 2) {
      schedule = SchedulePhase2(clusters, reach, used, ledger, config.seed);
    } else {
      for (const auto& c : clusters) {
        if (!c.sim_score) throw CampaignError(stage, "phase-two scores missing; run fca --phase 2");
      }
      schedule = SchedulePhase3(clusters, reach, used, ledger, config.seed);
    }
    WriteJson(config, "ledger.json", LedgerToJson(ledger));
  }
  WriteJson(config, PhaseFile(phase, "schedule.json"), ScheduleToJson(phase, schedule));
  return schedule.size();
}

size_t CmdInject(const CampaignConfig& config, int phase) {
  const std::string stage = "inject";
  if (phase < 1 || phase > 3) throw CampaignError(stage, "phase must be 1, 2 or 3");
  Loaded l = Load(config, stage);
  auto schedule = LoadSchedule(config, phase, stage);
  std::vector<std::vector<RunTrace>> results(schedule.size());
  ParallelFor(schedule.size(), config.workers, [&](size_t i) {
    const auto& e = schedule[i];
    const FaultPoint* f = FindFault(l.faults, e.fault);
    const TestWorkload* t = l.scenario.FindTest(e.test);
    if (!f || !t) throw CampaignError(stage, "unknown experiment " + e.fault + "@" + e.test);
    results[i] = RunInjection(l.scenario, *t, *f, config.delay_values, config.seed);
  });
  std::vector<RunTrace> all;
  for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
  WriteText(config, PhaseFile(phase, "trace"), TraceArchiveToString(all));
  return all.size();
}

size_t CmdFca(const CampaignConfig& config, int phase) {
  const std::string stage = "fca";
  if (phase < 1 || phase > 3) throw CampaignError(stage, "phase must be 1, 2 or 3");
  Loaded l = Load(config, stage);
  auto schedule = LoadSchedule(config, phase, stage);
  auto profiles = ReadTraces(config, "profile.trace", stage);
  auto injections = ReadTraces(config, PhaseFile(phase, "trace"), stage);
  DiffOptions options;
  options.p_threshold = config.p_value;

  std::vector<ExperimentRecord> records;
  std::vector<CausalEdge> edges;
  size_t at = 0;
  for (const auto& e : schedule) {
    const FaultPoint* f = FindFault(l.faults, e.fault);
    if (!f) throw CampaignError(stage, "unknown fault " + e.fault);
    size_t n = PlansFor(*f, config.delay_values).size() * kRepetitions;
    if (at + n > injections.size()) {
      throw CampaignError(stage, "injection archive is shorter than the schedule");
    }
    std::vector<RunTrace> runs(injections.begin() + static_cast<std::ptrdiff_t>(at),
                               injections.begin() + static_cast<std::ptrdiff_t>(at + n));
    at += n;
    for (const auto& r : runs) {
      if (r.test != e.test || r.injection.target != e.fault) {
        throw CampaignError(stage, "injection archive does not match the schedule at run " +
                                       r.run_id);
      }
    }
    try {
      records.push_back(
          AnalyzeExperiment(e, ProfileOf(profiles, e.test), runs, l.faults, options));
    } catch (const FcaError& err) {
      throw CampaignError(stage, err.what());
    }
    auto es = EdgesFromReport(records.back().report, l.scenario.loops);
    edges.insert(edges.end(), es.begin(), es.end());
  }
  if (at != injections.size()) {
    throw CampaignError(stage, "injection archive is longer than the schedule");
  }
  WriteJson(config, PhaseFile(phase, "records.json"), RecordsToJson(phase, records));
  std::ostringstream edge_out;
  WriteEdgeArchive(edge_out, edges);
  WriteText(config, PhaseFile(phase, "edges"), edge_out.str());

  if (phase == 1) {
    Retrain(records, l.universe);
    auto clusters = BuildClusters(l.faults, records, config.tau);
    Json reach = ReadJson(config, "reachability.json", stage, kReachFormat);
    std::vector<std::string> unreachable;
    for (const auto& [fault, tests] : reach["faults"].items()) {
      if (tests.empty()) unreachable.push_back(fault);
    }
    WriteJson(config, "clusters.json", ClustersToJson(clusters, unreachable));
  } else if (phase == 2) {
    std::vector<std::string> unreachable;
    auto clusters = LoadClusters(config, stage, &unreachable);
    auto all = LoadRecords(config, 1, stage);
    all.insert(all.end(), records.begin(), records.end());
    Retrain(all, l.universe);
    ScoreClusters(clusters, all, config.epsilon);
    WriteJson(config, "clusters.json", ClustersToJson(clusters, unreachable));
  }
  return records.size();
}

DetectSummary CmdDetect(const CampaignConfig& config) {
  const std::string stage = "detect";
  Loaded l = Load(config, stage);
  auto clusters = LoadClusters(config, stage);
  std::vector<ExperimentRecord> records;
  std::vector<CausalEdge> edges;
  for (int k = 1; k <= 3; ++k) {
    auto r = LoadRecords(config, k, stage);
    records.insert(records.end(), r.begin(), r.end());
    auto e = LoadEdges(config, k, stage);
    edges.insert(edges.end(), e.begin(), e.end());
  }
  if (config.retrain_before_detect) {
    Retrain(records, l.universe);
    ScoreClusters(clusters, records, config.epsilon);
  }
  BudgetLedger ledger = LedgerFromJson(ReadJson(config, "ledger.json", stage, kLedgerFormat));

  BeamOptions opts;
  opts.beam_size = config.beam_size;
  opts.max_depth = config.max_depth;
  opts.max_delay_injections = config.max_delay_injections;
  opts.workers = config.workers;
  CycleReport found = BeamSearch(edges, clusters, opts);
  for (const auto& c : found.cycles) {
    if (!ValidateCycle(edges, c)) throw CampaignError(stage, "beam produced an invalid cycle");
  }
  auto groups = ClusterCycles(found.cycles);

  DetectSummary summary;
  summary.cycles = found.cycles.size();
  summary.cycle_clusters = groups.size();
  for (const auto& c : found.cycles) {
    summary.planted_found =
        summary.planted_found || MatchesPlanted(l.scenario.planted, edges, c);
  }

  Json j;
  j["format"] = kReportHeader;
  j["scenario"] = l.scenario.name;
  j["seed"] = config.seed;
  Json budget;
  budget["total"] = ledger.total;
  budget["quota"] = {ledger.quota[0], ledger.quota[1], ledger.quota[2]};
  budget["spent"] = {ledger.spent[0], ledger.spent[1], ledger.spent[2]};
  budget["unspent"] = ledger.unspent;
  j["budget"] = budget;
  j["beam_size"] = config.beam_size;
  j["max_depth"] = config.max_depth;
  j["max_delay_injections"] =
      config.max_delay_injections ? Json(*config.max_delay_injections) : Json(nullptr);
  j["fault_points"] = l.faults.size();
  j["experiments"] = records.size();
  j["edges"] = edges.size();
  Json cl = Json::array();
  for (const auto& c : clusters) {
    cl.push_back({{"id", c.id},
                  {"members", c.members},
                  {"sim_score", c.sim_score ? Json(*c.sim_score) : Json(nullptr)},
                  {"weight", c.weight}});
  }
  j["fault_clusters"] = cl;
  Json cc = Json::array();
  for (const auto& g : groups) {
    Json gj;
    gj["signature"] = g.signature;
    Json cycles = Json::array();
    for (const auto& c : g.members) {
      Json cj;
      cj["score"] = c.score;
      cj["planted"] = MatchesPlanted(l.scenario.planted, edges, c);
      Json es = Json::array();
      for (size_t i : c.edges) {
        const auto& e = edges[i];
        es.push_back({{"test", e.test},
                      {"injected", e.origin},
                      {"mode", ModeOf(l.faults, e.origin)},
                      {"kind", EdgeKindName(e.kind)},
                      {"src", e.src},
                      {"dst", e.dst},
                      {"evidence", e.evidence}});
      }
      cj["edges"] = es;
      cycles.push_back(cj);
    }
    gj["cycles"] = cycles;
    cc.push_back(gj);
  }
  j["cycle_clusters"] = cc;
  j["planted"] = {{"declared", !l.scenario.planted.empty()},
                  {"found", summary.planted_found}};
  WriteJson(config, "report.json", j);

  std::ostringstream txt;
  txt << kReportHeader << "\n";
  txt << "scenario " << l.scenario.name << ", seed " << config.seed << "\n";
  txt << "budget " << ledger.TotalSpent() << "/" << ledger.total << " experiments ("
      << ledger.spent[0] << " + " << ledger.spent[1] << " + " << ledger.spent[2]
      << "), " << ledger.unspent << " unspent\n";
  txt << l.faults.size() << " fault points, " << edges.size() << " causal edges, beam "
      << config.beam_size << "\n\n";
  if (groups.empty()) {
    txt << "No self-sustaining cascading failure found.\n";
  } else {
    txt << groups.size() << " cycle cluster(s) found.\n";
  }
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    std::string sig;
    for (const auto& s : g.signature) sig += (sig.empty() ? "" : " -> ") + s;
    txt << "\nCluster " << gi + 1 << ": " << sig << " (" << g.members.size()
        << " cycle(s))\n";
    for (size_t ci = 0; ci < g.members.size(); ++ci) {
      const auto& c = g.members[ci];
      txt << "  Cycle " << ci + 1 << ", score " << FormatScore(c.score)
          << (MatchesPlanted(l.scenario.planted, edges, c) ? ", matches planted cycle" : "")
          << ":\n";
      for (size_t k = 0; k < c.edges.size(); ++k) {
        txt << "    " << k + 1 << ". " << Narrate(edges[c.edges[k]], l.faults) << "\n";
      }
      txt << "    ...which brings the chain back to " << edges[c.edges.front()].src
          << ".\n";
    }
  }
  WriteText(config, "report.txt", txt.str());
  return summary;
}

DetectSummary CmdCampaign(const CampaignConfig& config) {
  CmdProfile(config);
  for (int phase = 1; phase <= 3; ++phase) {
    CmdSchedule(config, phase);
    CmdInject(config, phase);
    CmdFca(config, phase);
  }
  return CmdDetect(config);
}

BaselineSummary CmdBaseline(const CampaignConfig& config) {
  const std::string stage = "baseline";
  Loaded l = Load(config, stage);
  BaselineResult result = NaiveBaseline(l.scenario, l.faults, config.delay_values,
                                        config.seed, config.p_value);
  BaselineSummary summary;
  summary.detected.assign(result.detected.begin(), result.detected.end());
  for (const auto& p : l.scenario.planted) {
    summary.planted_found = summary.planted_found || result.detected.count(p.src) > 0;
  }
  Json j;
  j["format"] = kBaselineFormat;
  j["scenario"] = l.scenario.name;
  j["seed"] = config.seed;
  j["experiments"] = result.experiments;
  j["detected"] = summary.detected;
  j["planted"] = {{"declared", !l.scenario.planted.empty()},
                  {"found", summary.planted_found}};
  WriteJson(config, "baseline.json", j);
  std::ostringstream txt;
  txt << "baseline for " << l.scenario.name << ": " << result.experiments
      << " single-fault experiments\n";
  if (summary.detected.empty()) {
    txt << "no fault causes itself\n";
  } else {
    for (const auto& f : summary.detected) txt << "  " << f << " causes itself\n";
  }
  WriteText(config, "baseline.txt", txt.str());
  return summary;
}

}  // namespace cascadelab

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


#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "cascadelab/beam.h"
#include "cascadelab/stitch.h"
#include "oracles.h"
#include "test_util.h"

namespace cascadelab {
namespace {

using testing::Ctx;
using testing::MakeEdge;

const StitchContext kA = Ctx({"s#1"});
const StitchContext kB = Ctx({"s#2"});

std::vector<FaultCluster> Clusters(
    const std::vector<std::pair<std::vector<std::string>, double>>& groups) {
  std::vector<FaultCluster> out;
  for (const auto& [members, sim] : groups) {
    FaultCluster c;
    c.id = "G" + std::to_string(out.size());
    c.members = members;
    c.sim_score = sim;
    out.push_back(c);
  }
  return out;
}

std::set<std::vector<size_t>> CycleSet(const CycleReport& r) {
  std::set<std::vector<size_t>> out;
  for (const auto& c : r.cycles) out.insert(c.edges);
  return out;
}

TEST(BeamSearch, SelfEdgeIsOneEdgeCycle) {
  std::vector<CausalEdge> edges = {MakeEdge(EdgeKind::kExcInj, "x", "x", "t1", {kA}, {kA})};
  auto r = BeamSearch(edges, {});
  ASSERT_EQ(r.cycles.size(), 1u);
  EXPECT_EQ(r.cycles[0].edges, (std::vector<size_t>{0}));
  EXPECT_EQ(r.cycles[0].signature, (std::vector<std::string>{"x"}));
}

TEST(BeamSearch, TwoEdgeCycleReportedOnce) {
  std::vector<CausalEdge> edges = {
      MakeEdge(EdgeKind::kExcInj, "b", "a", "t2", {kB}, {kA}),
      MakeEdge(EdgeKind::kExcInj, "a", "b", "t1", {kA}, {kB}),
      MakeEdge(EdgeKind::kExcInj, "a", "c", "t1", {kA}, {kB}),
  };
  auto r = BeamSearch(edges, {});
  ASSERT_EQ(r.cycles.size(), 1u);
  EXPECT_EQ(r.cycles[0].edges, (std::vector<size_t>{0, 1}));
  EXPECT_TRUE(ValidateCycle(edges, r.cycles[0]));
}

TEST(BeamSearch, MatchesExhaustiveOracleOnRandomCorpora) {
  std::mt19937 rng(20261014);
  size_t with_cycles = 0;
  for (int round = 0; round < 50; ++round) {
    auto edges = oracle::RandomCorpus(rng);
    auto expected = oracle::SimpleCycles(edges, 16);
    auto got = BeamSearch(edges, {});
    EXPECT_EQ(CycleSet(got), expected) << "round " << round;
    EXPECT_EQ(got.cycles.size(), expected.size());
    for (const auto& c : got.cycles) EXPECT_TRUE(ValidateCycle(edges, c));
    with_cycles += !expected.empty();
  }
  EXPECT_GT(with_cycles, 5u);
}

TEST(BeamSearch, NarrowBeamFindsSubset) {
  std::mt19937 rng(77);
  for (int round = 0; round < 50; ++round) {
    auto edges = oracle::RandomCorpus(rng);
    auto full = CycleSet(BeamSearch(edges, {}));
    for (size_t b : {1u, 2u, 4u}) {
      BeamOptions opt;
      opt.beam_size = b;
      for (const auto& c : CycleSet(BeamSearch(edges, {}, opt))) {
        EXPECT_TRUE(full.count(c));
      }
    }
  }
}

TEST(BeamSearch, WorkerCountDoesNotChangeResult) {
  std::mt19937 rng(5);
  for (int round = 0; round < 30; ++round) {
    auto edges = oracle::RandomCorpus(rng);
    BeamOptions one, four;
    four.workers = 4;
    auto a = BeamSearch(edges, {}, one);
    auto b = BeamSearch(edges, {}, four);
    ASSERT_EQ(a.cycles.size(), b.cycles.size());
    for (size_t i = 0; i < a.cycles.size(); ++i) {
      EXPECT_EQ(a.cycles[i].edges, b.cycles[i].edges);
      EXPECT_EQ(a.cycles[i].score, b.cycles[i].score);
    }
    EXPECT_EQ(CycleSet(a), CycleSet(BeamSearch(edges, {}, one)));
  }
}

TEST(BeamSearch, DepthCapBoundsCycleLength) {
  // Ring of 5 exception edges.
  std::vector<CausalEdge> edges;
  const char* n[] = {"a", "b", "c", "d", "e"};
  for (int i = 0; i < 5; ++i) {
    edges.push_back(MakeEdge(EdgeKind::kExcInj, n[i], n[(i + 1) % 5], "t1", {kA}, {kA}));
  }
  BeamOptions opt;
  opt.max_depth = 4;
  EXPECT_TRUE(BeamSearch(edges, {}, opt).cycles.empty());
  opt.max_depth = 5;
  EXPECT_EQ(BeamSearch(edges, {}, opt).cycles.size(), 1u);
}

TEST(BeamSearch, DelayInjectionCap) {
  std::vector<CausalEdge> edges = {
      MakeEdge(EdgeKind::kSlowDelay, "L", "M", "t1", {kA}, {kA}),
      MakeEdge(EdgeKind::kExcDelay, "M", "e", "t1", {kA}, {kA}),
      MakeEdge(EdgeKind::kSlowInj, "e", "L", "t1", {kA}, {kA}),
  };
  EXPECT_EQ(DelayInjections(edges, {0, 1, 2}), 2u);
  EXPECT_EQ(BeamSearch(edges, {}).cycles.size(), 1u);
  for (size_t cap : {0u, 1u}) {
    BeamOptions opt;
    opt.max_delay_injections = cap;
    EXPECT_TRUE(BeamSearch(edges, {}, opt).cycles.empty()) << cap;
  }
  BeamOptions two;
  two.max_delay_injections = 2;
  EXPECT_EQ(BeamSearch(edges, {}, two).cycles.size(), 1u);
}

TEST(BeamSearch, CyclesThroughHopEdges) {
  std::vector<CausalEdge> edges = {
      MakeEdge(EdgeKind::kSlowInj, "f", "L2", "t1", {kA}, {kB}),
      MakeEdge(EdgeKind::kIcfg, "L2", "L1", "t1", {kB}, {kA}, "f"),
      MakeEdge(EdgeKind::kExcDelay, "L1", "f", "t2", {kA}, {kA}),
  };
  auto r = BeamSearch(edges, {});
  ASSERT_EQ(r.cycles.size(), 1u);
  EXPECT_EQ(r.cycles[0].edges, (std::vector<size_t>{0, 1, 2}));
  EXPECT_EQ(r.cycles[0].signature, (std::vector<std::string>{"f", "L1"}));
}

TEST(ScoreChain, MeanOverBaseEdges) {
  auto clusters = Clusters({{{"a"}, 0.2}, {{"b"}, 0.6}});
  std::vector<CausalEdge> chain = {
      MakeEdge(EdgeKind::kExcInj, "a", "b", "t1"),
      MakeEdge(EdgeKind::kIcfg, "b", "c", "t1", {kA}, {kA}, "a"),
      MakeEdge(EdgeKind::kExcInj, "b", "a", "t1"),
  };
  EXPECT_NEAR(ScoreChain(chain, clusters), 0.4, 1e-12);
  // Unclustered faults count as fully similar.
  EXPECT_NEAR(ScoreChain({MakeEdge(EdgeKind::kExcInj, "zz", "a", "t1")}, clusters), 1.0, 1e-12);
}

TEST(BeamSearch, CyclesSortedByScore) {
  auto clusters = Clusters({{{"a", "b"}, 0.9}, {{"c", "d"}, 0.1}});
  std::vector<CausalEdge> edges = {
      MakeEdge(EdgeKind::kExcInj, "a", "b", "t1", {kA}, {kA}),
      MakeEdge(EdgeKind::kExcInj, "b", "a", "t1", {kA}, {kA}),
      MakeEdge(EdgeKind::kExcInj, "c", "d", "t1", {kB}, {kB}),
      MakeEdge(EdgeKind::kExcInj, "d", "c", "t1", {kB}, {kB}),
  };
  auto r = BeamSearch(edges, clusters);
  ASSERT_EQ(r.cycles.size(), 2u);
  EXPECT_EQ(r.cycles[0].edges, (std::vector<size_t>{2, 3}));
  EXPECT_NEAR(r.cycles[0].score, 0.1, 1e-12);
  EXPECT_EQ(r.cycles[0].signature, (std::vector<std::string>{"G1", "G1"}));
  EXPECT_NEAR(r.cycles[1].score, 0.9, 1e-12);
}

TEST(CanonicalRotation, LexicographicMinimum) {
  using V = std::vector<std::string>;
  EXPECT_EQ(CanonicalRotation(V{"G2", "G0", "G1"}), (V{"G0", "G1", "G2"}));
  EXPECT_EQ(CanonicalRotation(V{"G1", "G0", "G0"}), (V{"G0", "G0", "G1"}));
  EXPECT_EQ(CanonicalRotation(V{"G0"}), (V{"G0"}));
  EXPECT_EQ(CanonicalRotation(V{}), V{});
}

TEST(ClusterCycles, GroupsByRotationOfSignature) {
  // f1 and f3 share G0; f2 is in G1.
  auto mk = [](std::vector<size_t> edges, std::vector<std::string> sig, double score) {
    Chain c;
    c.edges = std::move(edges);
    c.signature = std::move(sig);
    c.score = score;
    return c;
  };
  std::vector<Chain> cycles = {mk({0, 1}, {"G0", "G1"}, 0.5), mk({2, 3}, {"G1", "G0"}, 0.3),
                               mk({4, 5}, {"G0", "G0"}, 0.7)};
  auto groups = ClusterCycles(cycles);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].signature, (std::vector<std::string>{"G0", "G1"}));
  ASSERT_EQ(groups[0].members.size(), 2u);
  EXPECT_EQ(groups[0].members[0].edges, (std::vector<size_t>{2, 3}));
  EXPECT_EQ(groups[1].signature, (std::vector<std::string>{"G0", "G0"}));
}

TEST(ValidateCycle, RejectsBrokenJunction) {
  std::vector<CausalEdge> edges = {
      MakeEdge(EdgeKind::kExcInj, "a", "b", "t1", {kA}, {kA}),
      MakeEdge(EdgeKind::kExcInj, "b", "a", "t1", {kA}, {kA}),
      MakeEdge(EdgeKind::kExcInj, "b", "a", "t1", {kA}, {kB}),
  };
  Chain good;
  good.edges = {0, 1};
  Chain bad;
  bad.edges = {0, 2};
  EXPECT_TRUE(ValidateCycle(edges, good));
  EXPECT_FALSE(ValidateCycle(edges, bad));
  Chain empty;
  EXPECT_FALSE(ValidateCycle(edges, empty));
}

}  // namespace
}  // namespace cascadelab

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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cascadelab/alloc.h"
#include "cascadelab/fca.h"

namespace cascadelab {

struct Chain {
  std::vector<size_t> edges;  // Indices into the edge corpus.
  double score = 0;
  // Cluster ids of the injected faults, one per base edge.
  std::vector<std::string> signature;
};

// Mean sim-score of the clusters of the chain's injected faults.
double ScoreChain(const std::vector<CausalEdge>& chain_edges,
                  const std::vector<FaultCluster>& clusters);

struct BeamOptions {
  size_t beam_size = 100000;
  size_t max_depth = 16;
  std::optional<size_t> max_delay_injections;
  size_t workers = 1;
};

struct CycleReport {
  // Each cycle once, rotated to start at its smallest base-edge index;
  // sorted by (score, edge ids).
  std::vector<Chain> cycles;
  size_t levels = 0;
};

// succ[i] lists every j that may follow edge i.
std::vector<std::vector<size_t>> BuildSuccessors(const std::vector<CausalEdge>& edges);

// Number of base edges whose injected fault is a loop delay.
size_t DelayInjections(const std::vector<CausalEdge>& edges,
                       const std::vector<size_t>& chain);

CycleReport BeamSearch(const std::vector<CausalEdge>& edges,
                       const std::vector<FaultCluster>& clusters,
                       const BeamOptions& options = {});

struct CycleCluster {
  std::vector<std::string> signature;  // Rotation-minimal.
  std::vector<Chain> members;          // Sorted by score.
};

std::vector<std::string> CanonicalRotation(const std::vector<std::string>& sig);

std::vector<CycleCluster> ClusterCycles(const std::vector<Chain>& cycles);

// Replays stitching over consecutive edges and the closing junction.
bool ValidateCycle(const std::vector<CausalEdge>& edges, const Chain& cycle);

}  // namespace cascadelab

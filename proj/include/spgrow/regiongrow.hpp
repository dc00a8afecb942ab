// Copyright 2026 The spgrow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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
#include <span>
#include <vector>

#include "spgrow/affinity.hpp"
#include "spgrow/common.hpp"
#include "spgrow/oversegment.hpp"

namespace spgrow {

enum class MergeCriterion {
  kMultiLevel,  // size- and distance-weighted region average
  kPairwise,    // popped node vs candidate only
};

struct GrowthConfig {
  std::vector<double> thresholds{0.9, 0.8, 0.7};
  double gamma = 0.5;
  int max_distance = 2;
  MergeCriterion criterion = MergeCriterion::kMultiLevel;

  void validate() const;
};

inline const std::vector<double> kFineSchedule{0.9, 0.8, 0.7};
inline const std::vector<double> kClutteredSchedule{0.9, 0.8, 0.7, 0.6, 0.5};

// Nodes with point counts, adjacency, and for each node the nodes within two
// hops together with their hop distance and affinity (nullopt: no evidence).
class GrowthGraph {
 public:
  struct Link {
    Index node;
    std::uint8_t distance;
    std::optional<double> affinity;
  };

  GrowthGraph() = default;
  GrowthGraph(std::vector<double> sizes, AdjacencyGraph adjacency,
              std::vector<std::vector<Link>> links);

  // Superpoint-level graph: sizes from the partition, affinities from the
  // matrix over all pairs within two hops.
  static GrowthGraph from_matrix(const SuperpointPartition& partition,
                                 const AdjacencyGraph& adjacency,
                                 const AffinityMatrix& matrix);

  Index size() const { return static_cast<Index>(sizes_.size()); }
  double node_size(Index i) const { return sizes_[i]; }
  const AdjacencyGraph& adjacency() const { return adjacency_; }
  const std::vector<Link>& links(Index i) const { return links_[i]; }
  const Link* link(Index i, Index j) const;

 private:
  std::vector<double> sizes_;
  AdjacencyGraph adjacency_;
  std::vector<std::vector<Link>> links_;  // ascending node id
};

struct RegionLabeling {
  std::vector<Index> instance_id;          // per node, 1..R
  std::vector<std::vector<Index>> members;  // members[r - 1], ascending
  std::vector<double> sizes;               // total points per region

  Index num_regions() const { return static_cast<Index>(members.size()); }
  static RegionLabeling from_ids(std::vector<Index> ids, const GrowthGraph& graph);
};

// Weighted average of A(i, k) over members k within max_distance hops of
// node i, each weighted by gamma^d * N_k. Members without evidence are
// skipped; nullopt when nothing remains.
std::optional<double> region_node_affinity(std::span<const Index> region, Index node,
                                           const GrowthGraph& graph, double gamma,
                                           int max_distance = 2);

// One pass of seeded BFS growth (ascending seeds, FIFO queue, ascending
// neighbors); a candidate joins iff its affinity to the region is > tau.
RegionLabeling grow_stage(const GrowthGraph& graph, double tau, double gamma,
                          MergeCriterion criterion = MergeCriterion::kMultiLevel,
                          int max_distance = 2);

// Collapses regions of `base` into nodes. Node sizes add up; two regions
// are adjacent when any members are; their affinity is the
// gamma^d * N_i * N_k weighted mean of member pairs within two hops in the
// base graph. Hop distances of the new graph are measured on the collapsed
// adjacency.
GrowthGraph collapse(const GrowthGraph& base, std::span<const Index> region_of_node,
                     double gamma);

// Runs grow_stage with each threshold in turn, collapsing regions between
// stages. Returns the labeling of base nodes; `stages` receives the
// base-level labeling after every stage.
RegionLabeling progressive_grow(const GrowthGraph& base, const GrowthConfig& config,
                                std::vector<RegionLabeling>* stages = nullptr);

// Mean finalized affinity over evidence pairs inside each region; 1.0 for
// regions without any.
std::map<Index, double> region_confidence(const RegionLabeling& regions,
                                          const AffinityMatrix& matrix);

}  // namespace spgrow

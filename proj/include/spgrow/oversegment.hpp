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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spgrow/common.hpp"
#include "spgrow/geometry.hpp"

namespace spgrow {

struct NormalDiagnostics {
  std::vector<Index> degenerate;  // points whose neighborhood had zero spread
};

// Per-point PCA normals over the k nearest neighbors (the point included).
// Normals face `viewpoint` when given, else +z. Degenerate neighborhoods get
// +z and are listed in the diagnostics.
PointCloud estimate_normals(const PointCloud& cloud, int k,
                            const std::optional<Eigen::Vector3d>& viewpoint = std::nullopt,
                            NormalDiagnostics* diagnostics = nullptr);

struct SuperpointPartition {
  std::vector<Index> label;                 // per point, in [0, num_superpoints)
  std::vector<std::vector<Index>> members;  // ascending point indices

  Index num_superpoints() const { return static_cast<Index>(members.size()); }
  Index num_points() const { return static_cast<Index>(label.size()); }
  Index superpoint_size(Index k) const { return static_cast<Index>(members[k].size()); }

  // Compacts arbitrary ids to [0, K) in order of first occurrence.
  static SuperpointPartition from_labels(std::span<const std::int64_t> ids);

  void validate() const;
};

// Undirected, self-loop free neighbor lists with ascending ids.
class AdjacencyGraph {
 public:
  AdjacencyGraph() = default;
  explicit AdjacencyGraph(Index n) : neighbors_(static_cast<std::size_t>(n)) {}

  static AdjacencyGraph from_edges(Index n, std::vector<std::pair<Index, Index>> edges);

  Index size() const { return static_cast<Index>(neighbors_.size()); }
  const std::vector<Index>& neighbors(Index i) const { return neighbors_[i]; }
  bool adjacent(Index i, Index j) const;
  std::size_t num_edges() const;

  void validate() const;

 private:
  std::vector<std::vector<Index>> neighbors_;
};

struct FelzenszwalbParams {
  int knn = 10;
  double threshold_scale = 0.1;
  int min_size = 20;
};

struct WeightedEdge {
  double weight;
  Index a, b;  // a < b
};

// Symmetrized k-NN graph weighted by 1 - n_a.n_b (clamped at 0), sorted by
// (weight, a, b).
std::vector<WeightedEdge> normal_knn_edges(const PointCloud& cloud, int knn);

// Union-find pass only: merge when w <= min(Int(C1) + s/|C1|, Int(C2) + s/|C2|).
// Returns per-point root ids (the lowest point index of each component).
std::vector<Index> felzenszwalb_components(Index n, std::span<const WeightedEdge> edges,
                                           double threshold_scale);

// Full oversegmentation: union-find pass, then components smaller than
// min_size are absorbed along the cheapest remaining edge.
SuperpointPartition felzenszwalb_segment(const PointCloud& cloud,
                                         const FelzenszwalbParams& params = {});

// Superpoints i != j are adjacent when some point pair across them lies
// within `radius`.
AdjacencyGraph superpoint_adjacency(const PointCloud& cloud,
                                    const SuperpointPartition& partition, double radius);

// Every point its own superpoint; adjacency from the symmetrized k-NN graph.
SuperpointPartition singleton_partition(Index n);
AdjacencyGraph knn_adjacency(const PointCloud& cloud, int knn);

// ScanNet-style {"segIndices": [...]} segment file.
SuperpointPartition read_segs_json(const std::string& path, Index expected_points);

}  // namespace spgrow

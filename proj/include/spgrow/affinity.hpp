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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spgrow/common.hpp"
#include "spgrow/geometry.hpp"
#include "spgrow/oversegment.hpp"

namespace spgrow {

// Mask-label counts over the visible points of one superpoint in one view.
// Background is never stored.
class LabelHistogram {
 public:
  LabelHistogram() = default;
  explicit LabelHistogram(std::vector<std::pair<std::int32_t, std::int32_t>> bins);

  bool empty() const { return bins_.empty(); }
  double norm() const { return norm_; }
  std::int32_t count(std::int32_t label) const;
  const std::vector<std::pair<std::int32_t, std::int32_t>>& bins() const { return bins_; }

 private:
  std::vector<std::pair<std::int32_t, std::int32_t>> bins_;  // (label, count), ascending label
  double norm_ = 0.0;
};

LabelHistogram compute_histogram(std::span<const Index> superpoint,
                                 const Projection& projection, const MaskImage& masks);

// Cosine similarity of the two count vectors; nullopt when either is empty.
std::optional<double> single_view_affinity(const LabelHistogram& a, const LabelHistogram& b);

struct ViewEvidence {
  std::optional<double> affinity;
  double visibility_i = 0.0;
  double visibility_j = 0.0;
};

struct AggregatedAffinity {
  std::optional<double> affinity;  // nullopt: no evidence
  double weight_total = 0.0;
};

// Visibility-product weighted mean over views. Views without evidence or
// with an invisible primitive weigh 0; totals below w_min carry no evidence.
AggregatedAffinity aggregate_affinity(std::span<const ViewEvidence> views, double w_min = 0.0);

// Unordered superpoint pair (i < j) at graph distance 1 or 2.
struct NodePair {
  Index i, j;
  std::uint8_t distance;
};

// All pairs within two hops, sorted by (i, j).
std::vector<NodePair> pairs_within_two_hops(const AdjacencyGraph& graph);

// Sparse symmetric affinities. Each unordered pair is stored once, so
// lookups of (i, j) and (j, i) read the same entry.
class AffinityMatrix {
 public:
  struct Entry {
    Index i, j;  // i < j
    double weighted_sum = 0.0;
    double weight_total = 0.0;
    std::optional<double> value;
  };

  AffinityMatrix() = default;
  AffinityMatrix(Index num_nodes, std::vector<Entry> entries);

  Index num_nodes() const { return num_nodes_; }
  const std::vector<Entry>& entries() const { return entries_; }

  const Entry* find(Index i, Index j) const;
  std::optional<double> affinity(Index i, Index j) const;

  // value = weighted_sum / weight_total, clamped to [0, 1]; pairs whose
  // total is zero or below w_min carry no evidence.
  void finalize(double w_min);

  void validate() const;

 private:
  Index num_nodes_ = 0;
  std::vector<Entry> entries_;     // sorted by (i, j)
  std::vector<std::size_t> rows_;  // CSR offsets by i
};

struct AffinityOptions {
  double depth_tolerance = kDefaultDepthTolerance;
  double w_min = 0.0;
};

// Accumulates visibility-weighted single-view cosines across all views for
// every pair within two hops of each other.
AffinityMatrix build_affinity_matrix(const PointCloud& cloud,
                                     const SuperpointPartition& partition,
                                     const AdjacencyGraph& adjacency,
                                     std::span<const CameraView> views,
                                     const AffinityOptions& options = {},
                                     std::vector<std::string>* empty_frames = nullptr);

// Text triplets "i j affinity weight_total" after a header line; affinity is
// "none" for pairs without evidence. Values are written with 17 significant
// digits so a dump/load cycle is exact.
void save_affinity(const std::string& path, const AffinityMatrix& matrix);
AffinityMatrix load_affinity(const std::string& path);

}  // namespace spgrow

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

#include "spgrow/oversegment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "spgrow/io.hpp"
#include "spgrow/knn.hpp"
#include "spgrow/parallel.hpp"

namespace spgrow {

PointCloud estimate_normals(const PointCloud& cloud, int k,
                            const std::optional<Eigen::Vector3d>& viewpoint,
                            NormalDiagnostics* diagnostics) {
  require(k >= 3 && k <= cloud.size(), "normal estimation needs 3 <= k <= N");
  const KdTree tree(cloud.positions);
  PointCloud out = cloud;
  out.normals.resize(3, cloud.size());
  std::vector<std::uint8_t> degenerate(static_cast<std::size_t>(cloud.size()), 0);

  parallel_for(static_cast<std::size_t>(cloud.size()), [&](std::size_t i) {
    const Eigen::Vector3d p = cloud.positions.col(static_cast<Eigen::Index>(i));
    const auto nbrs = tree.knn(p, k);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (Index j : nbrs) mean += cloud.positions.col(j);
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (Index j : nbrs) {
      const Eigen::Vector3d d = cloud.positions.col(j) - mean;
      cov.noalias() += d * d.transpose();
    }
    Eigen::Vector3d n = Eigen::Vector3d::UnitZ();
    if (cov.trace() > 1e-18) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
      n = solver.eigenvectors().col(0).normalized();
      const Eigen::Vector3d toward = viewpoint ? Eigen::Vector3d(*viewpoint - p)
                                               : Eigen::Vector3d::UnitZ();
      if (n.dot(toward) < 0) n = -n;
    } else {
      degenerate[i] = 1;
    }
    out.normals.col(static_cast<Eigen::Index>(i)) = n;
  });

  if (diagnostics) {
    diagnostics->degenerate.clear();
    for (Index i = 0; i < cloud.size(); ++i)
      if (degenerate[i]) diagnostics->degenerate.push_back(i);
  }
  return out;
}

SuperpointPartition SuperpointPartition::from_labels(std::span<const std::int64_t> ids) {
  SuperpointPartition p;
  p.label.resize(ids.size());
  std::unordered_map<std::int64_t, Index> compact;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, inserted] = compact.try_emplace(ids[i], static_cast<Index>(compact.size()));
    if (inserted) p.members.emplace_back();
    p.label[i] = it->second;
    p.members[it->second].push_back(static_cast<Index>(i));
  }
  return p;
}

void SuperpointPartition::validate() const {
  std::size_t total = 0;
  for (Index k = 0; k < num_superpoints(); ++k) {
    ensure(!members[k].empty(), "superpoint " + std::to_string(k) + " is empty");
    for (Index p : members[k]) {
      ensure(p >= 0 && p < num_points() && label[p] == k, "superpoint membership mismatch");
    }
    total += members[k].size();
  }
  ensure(total == label.size(), "superpoints do not partition the cloud");
}

AdjacencyGraph AdjacencyGraph::from_edges(Index n, std::vector<std::pair<Index, Index>> edges) {
  AdjacencyGraph g(n);
  for (auto& [a, b] : edges) {
    ensure(a >= 0 && b >= 0 && a < n && b < n, "adjacency edge out of range");
    if (a == b) continue;
    g.neighbors_[a].push_back(b);
    g.neighbors_[b].push_back(a);
  }
  for (auto& nb : g.neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

bool AdjacencyGraph::adjacent(Index i, Index j) const {
  const auto& nb = neighbors_[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::size_t AdjacencyGraph::num_edges() const {
  std::size_t twice = 0;
  for (const auto& nb : neighbors_) twice += nb.size();
  return twice / 2;
}

void AdjacencyGraph::validate() const {
  for (Index i = 0; i < size(); ++i) {
    for (Index j : neighbors_[i]) {
      ensure(j >= 0 && j < size(), "adjacency id out of range");
      ensure(j != i, "adjacency has a self-loop");
      ensure(adjacent(j, i), "adjacency is not symmetric");
    }
  }
}

std::vector<WeightedEdge> normal_knn_edges(const PointCloud& cloud, int knn) {
  require(cloud.has_normals(), "segmentation needs normals");
  require(knn >= 1 && knn <= cloud.size() - 1,
          "knn (" + std::to_string(knn) + ") must be in [1, N-1]");
  const KdTree tree(cloud.positions);
  const auto n = static_cast<std::size_t>(cloud.size());
  std::vector<std::vector<Index>> nbrs(n);
  parallel_for(n, [&](std::size_t i) {
    nbrs[i] = tree.knn(cloud.positions.col(static_cast<Eigen::Index>(i)), knn,
                       static_cast<Index>(i));
  });
  std::vector<WeightedEdge> edges;
  edges.reserve(n * static_cast<std::size_t>(knn));
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<Index>(i);
    for (Index b : nbrs[i]) {
      const Index lo = std::min(a, b), hi = std::max(a, b);
      const double w = std::max(0.0, 1.0 - cloud.normals.col(lo).dot(cloud.normals.col(hi)));
      edges.push_back({w, lo, hi});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const WeightedEdge& x, const WeightedEdge& y) {
                            return x.a == y.a && x.b == y.b;
                          }),
              edges.end());
  return edges;
}

namespace {

// Union-find whose root is always the lowest index in the set.
class DisjointSets {
 public:
  explicit DisjointSets(Index n)
      : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1),
        internal_(static_cast<std::size_t>(n), 0.0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  Index find(Index x) {
    Index root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const Index next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  Index join(Index a, Index b, double weight) {
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    internal_[a] = std::max({internal_[a], internal_[b], weight});
    return a;
  }

  Index size(Index root) const { return size_[root]; }
  double internal(Index root) const { return internal_[root]; }

 private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
  std::vector<double> internal_;
};

void merge_pass(DisjointSets& sets, std::span<const WeightedEdge> edges, double scale) {
  for (const auto& e : edges) {
    const Index a = sets.find(e.a), b = sets.find(e.b);
    if (a == b) continue;
    const double ta = sets.internal(a) + scale / sets.size(a);
    const double tb = sets.internal(b) + scale / sets.size(b);
    if (e.weight <= std::min(ta, tb)) sets.join(a, b, e.weight);
  }
}

}  // namespace

std::vector<Index> felzenszwalb_components(Index n, std::span<const WeightedEdge> edges,
                                           double threshold_scale) {
  DisjointSets sets(n);
  merge_pass(sets, edges, threshold_scale);
  std::vector<Index> roots(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) roots[i] = sets.find(i);
  return roots;
}

SuperpointPartition felzenszwalb_segment(const PointCloud& cloud,
                                         const FelzenszwalbParams& params) {
  require(params.threshold_scale >= 0, "threshold_scale must be non-negative");
  const Index n = cloud.size();
  const auto edges = normal_knn_edges(cloud, params.knn);

  DisjointSets sets(n);
  merge_pass(sets, edges, params.threshold_scale);
  for (const auto& e : edges) {
    const Index a = sets.find(e.a), b = sets.find(e.b);
    if (a != b && (sets.size(a) < params.min_size || sets.size(b) < params.min_size)) {
      sets.join(a, b, sets.internal(a));
    }
  }
  std::vector<std::int64_t> roots(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) roots[i] = sets.find(i);
  auto partition = SuperpointPartition::from_labels(roots);
  partition.validate();
  return partition;
}

AdjacencyGraph superpoint_adjacency(const PointCloud& cloud,
                                    const SuperpointPartition& partition, double radius) {
  require(radius > 0, "adjacency radius must be positive");
  require(partition.num_points() == cloud.size(), "partition does not match the cloud");
  struct CellHash {
    std::size_t operator()(const Eigen::Vector3i& c) const {
      return static_cast<std::size_t>(c.x()) * 73856093u ^
             static_cast<std::size_t>(c.y()) * 19349663u ^
             static_cast<std::size_t>(c.z()) * 83492791u;
    }
  };
  auto cell_of = [&](Index i) -> Eigen::Vector3i {
    return (cloud.positions.col(i) / radius).array().floor().cast<int>();
  };
  std::unordered_map<Eigen::Vector3i, std::vector<Index>, CellHash> grid;
  for (Index i = 0; i < cloud.size(); ++i) grid[cell_of(i)].push_back(i);

  const double r2 = radius * radius;
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3i c = cell_of(i);
    const Index li = partition.label[i];
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(c + Eigen::Vector3i(dx, dy, dz));
          if (it == grid.end()) continue;
          for (Index j : it->second) {
            if (j <= i) continue;
            const Index lj = partition.label[j];
            if (lj == li) continue;
            if ((cloud.positions.col(i) - cloud.positions.col(j)).squaredNorm() <= r2) {
              edges.emplace_back(std::min(li, lj), std::max(li, lj));
            }
          }
        }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return AdjacencyGraph::from_edges(partition.num_superpoints(), std::move(edges));
}

SuperpointPartition singleton_partition(Index n) {
  std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return SuperpointPartition::from_labels(ids);
}

AdjacencyGraph knn_adjacency(const PointCloud& cloud, int knn) {
  require(knn >= 1 && knn <= cloud.size() - 1, "knn must be in [1, N-1]");
  const KdTree tree(cloud.positions);
  const auto n = static_cast<std::size_t>(cloud.size());
  std::vector<std::vector<Index>> nbrs(n);
  parallel_for(n, [&](std::size_t i) {
    nbrs[i] = tree.knn(cloud.positions.col(static_cast<Eigen::Index>(i)), knn,
                       static_cast<Index>(i));
  });
  std::vector<std::pair<Index, Index>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (Index j : nbrs[i]) edges.emplace_back(static_cast<Index>(i), j);
  return AdjacencyGraph::from_edges(cloud.size(), std::move(edges));
}

SuperpointPartition read_segs_json(const std::string& path, Index expected_points) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  require(j.contains("segIndices") && j["segIndices"].is_array(),
          path + ": missing integer array 'segIndices'");
  std::vector<std::int64_t> ids;
  for (const auto& v : j["segIndices"]) {
    require(v.is_number_integer(), path + ": non-integer segment id");
    ids.push_back(v.get<std::int64_t>());
  }
  require(static_cast<Index>(ids.size()) == expected_points,
          path + ": " + std::to_string(ids.size()) + " segment ids for " +
              std::to_string(expected_points) + " points");
  return SuperpointPartition::from_labels(ids);
}

}  // namespace spgrow

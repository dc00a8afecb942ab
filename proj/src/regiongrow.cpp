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

#include "spgrow/regiongrow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace spgrow {

void GrowthConfig::validate() const {
  require(!thresholds.empty(), "threshold schedule is empty");
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    require(thresholds[k] > 0 && thresholds[k] <= 1, "thresholds must lie in (0, 1]");
    if (k > 0) require(thresholds[k] < thresholds[k - 1], "thresholds must be strictly descending");
  }
  require(gamma > 0 && gamma <= 1, "gamma must lie in (0, 1]");
  require(max_distance == 1 || max_distance == 2, "max_distance must be 1 or 2");
}

GrowthGraph::GrowthGraph(std::vector<double> sizes, AdjacencyGraph adjacency,
                         std::vector<std::vector<Link>> links)
    : sizes_(std::move(sizes)), adjacency_(std::move(adjacency)), links_(std::move(links)) {
  ensure(adjacency_.size() == size() && static_cast<Index>(links_.size()) == size(),
         "growth graph parts disagree on node count");
  for (auto& l : links_) {
    std::sort(l.begin(), l.end(), [](const Link& a, const Link& b) { return a.node < b.node; });
  }
}

GrowthGraph GrowthGraph::from_matrix(const SuperpointPartition& partition,
                                     const AdjacencyGraph& adjacency,
                                     const AffinityMatrix& matrix) {
  const Index n = partition.num_superpoints();
  require(adjacency.size() == n && matrix.num_nodes() == n,
          "partition, adjacency and affinity matrix disagree on superpoint count");
  std::vector<double> sizes(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) sizes[k] = static_cast<double>(partition.superpoint_size(k));
  std::vector<std::vector<Link>> links(static_cast<std::size_t>(n));
  for (const auto& [i, j, d] : pairs_within_two_hops(adjacency)) {
    const auto* e = matrix.find(i, j);
    require(e != nullptr, "affinity matrix lacks pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") of the adjacency graph");
    links[i].push_back({j, d, e->value});
    links[j].push_back({i, d, e->value});
  }
  return GrowthGraph(std::move(sizes), adjacency, std::move(links));
}

const GrowthGraph::Link* GrowthGraph::link(Index i, Index j) const {
  const auto& l = links_[i];
  auto it = std::lower_bound(l.begin(), l.end(), j,
                             [](const Link& a, Index v) { return a.node < v; });
  return it != l.end() && it->node == j ? &*it : nullptr;
}

RegionLabeling RegionLabeling::from_ids(std::vector<Index> ids, const GrowthGraph& graph) {
  RegionLabeling out;
  Index regions = 0;
  for (Index id : ids) {
    ensure(id >= 1, "unlabeled node after growth");
    regions = std::max(regions, id);
  }
  out.members.resize(static_cast<std::size_t>(regions));
  out.sizes.assign(static_cast<std::size_t>(regions), 0.0);
  for (Index i = 0; i < static_cast<Index>(ids.size()); ++i) {
    out.members[ids[i] - 1].push_back(i);
    out.sizes[ids[i] - 1] += graph.node_size(i);
  }
  for (const auto& m : out.members) ensure(!m.empty(), "region ids are not dense");
  out.instance_id = std::move(ids);
  return out;
}

namespace {

// Multi-level affinity of `node` against the nodes currently labeled `id`.
std::optional<double> affinity_to_region(const GrowthGraph& graph, std::span<const Index> labels,
                                         Index id, Index node, double gamma, int max_distance) {
  double num = 0.0, den = 0.0;
  for (const auto& l : graph.links(node)) {
    if (l.distance > max_distance || labels[l.node] != id || !l.affinity) continue;
    const double beta = std::pow(gamma, l.distance) * graph.node_size(l.node);
    num += beta * *l.affinity;
    den += beta;
  }
  if (den <= 0) return std::nullopt;
  return num / den;
}

}  // namespace

std::optional<double> region_node_affinity(std::span<const Index> region, Index node,
                                           const GrowthGraph& graph, double gamma,
                                           int max_distance) {
  std::vector<Index> labels(static_cast<std::size_t>(graph.size()), 0);
  for (Index k : region) {
    ensure(k != node, "candidate node already belongs to the region");
    labels[k] = 1;
  }
  return affinity_to_region(graph, labels, 1, node, gamma, max_distance);
}

RegionLabeling grow_stage(const GrowthGraph& graph, double tau, double gamma,
                          MergeCriterion criterion, int max_distance) {
  const Index n = graph.size();
  std::vector<Index> labels(static_cast<std::size_t>(n), 0);
  Index id = 1;
  std::deque<Index> queue;
  for (Index seed = 0; seed < n; ++seed) {
    if (labels[seed] != 0) continue;
    queue.push_back(seed);
    labels[seed] = id;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      for (Index j : graph.adjacency().neighbors(v)) {
        if (labels[j] != 0) continue;
        std::optional<double> a;
        if (criterion == MergeCriterion::kMultiLevel) {
          a = affinity_to_region(graph, labels, id, j, gamma, max_distance);
        } else if (const auto* l = graph.link(v, j)) {
          a = l->affinity;
        }
        if (a && *a > tau) {
          queue.push_back(j);
          labels[j] = id;
        }
      }
    }
    ++id;
  }
  return RegionLabeling::from_ids(std::move(labels), graph);
}

GrowthGraph collapse(const GrowthGraph& base, std::span<const Index> region_of_node,
                     double gamma) {
  require(static_cast<Index>(region_of_node.size()) == base.size(),
          "region map does not match the graph");
  Index regions = 0;
  for (Index r : region_of_node) {
    ensure(r >= 1, "region ids start at 1");
    regions = std::max(regions, r);
  }
  std::vector<double> sizes(static_cast<std::size_t>(regions), 0.0);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < base.size(); ++i) {
    const Index ri = region_of_node[i] - 1;
    sizes[ri] += base.node_size(i);
    for (Index j : base.adjacency().neighbors(i)) {
      const Index rj = region_of_node[j] - 1;
      if (j > i && ri != rj) edges.emplace_back(std::min(ri, rj), std::max(ri, rj));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  AdjacencyGraph adjacency = AdjacencyGraph::from_edges(regions, std::move(edges));

  struct Sums {
    double weighted = 0.0, total = 0.0;
  };
  std::unordered_map<std::uint64_t, Sums> sums;
  auto key = [](Index a, Index b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  for (Index i = 0; i < base.size(); ++i) {
    const Index ri = region_of_node[i] - 1;
    for (const auto& l : base.links(i)) {
      if (l.node <= i || !l.affinity) continue;
      const Index rk = region_of_node[l.node] - 1;
      if (ri == rk) continue;
      const double w = std::pow(gamma, l.distance) * base.node_size(i) * base.node_size(l.node);
      auto& s = sums[key(std::min(ri, rk), std::max(ri, rk))];
      s.weighted += w * *l.affinity;
      s.total += w;
    }
  }

  std::vector<std::vector<GrowthGraph::Link>> links(static_cast<std::size_t>(regions));
  for (const auto& [a, b, d] : pairs_within_two_hops(adjacency)) {
    std::optional<double> value;
    if (auto it = sums.find(key(a, b)); it != sums.end() && it->second.total > 0) {
      value = std::clamp(it->second.weighted / it->second.total, 0.0, 1.0);
    }
    links[a].push_back({b, d, value});
    links[b].push_back({a, d, value});
  }
  return GrowthGraph(std::move(sizes), std::move(adjacency), std::move(links));
}

RegionLabeling progressive_grow(const GrowthGraph& base, const GrowthConfig& config,
                                std::vector<RegionLabeling>* stages) {
  config.validate();
  std::vector<Index> node_region(static_cast<std::size_t>(base.size()));
  for (Index i = 0; i < base.size(); ++i) node_region[i] = i + 1;

  GrowthGraph current = base;
  RegionLabeling result;
  if (stages) stages->clear();
  for (std::size_t t = 0; t < config.thresholds.size(); ++t) {
    const RegionLabeling stage = grow_stage(current, config.thresholds[t], config.gamma,
                                            config.criterion, config.max_distance);
    for (auto& r : node_region) r = stage.instance_id[r - 1];
    result = RegionLabeling::from_ids(node_region, base);
    if (stages) stages->push_back(result);
    if (t + 1 < config.thresholds.size()) current = collapse(base, node_region, config.gamma);
  }
  return result;
}

std::map<Index, double> region_confidence(const RegionLabeling& regions,
                                          const AffinityMatrix& matrix) {
  std::vector<double> sum(static_cast<std::size_t>(regions.num_regions()), 0.0);
  std::vector<std::size_t> count(sum.size(), 0);
  for (const auto& e : matrix.entries()) {
    if (!e.value) continue;
    const Index r = regions.instance_id[e.i];
    if (r != regions.instance_id[e.j]) continue;
    sum[r - 1] += *e.value;
    ++count[r - 1];
  }
  std::map<Index, double> out;
  for (Index r = 1; r <= regions.num_regions(); ++r) {
    out[r] = count[r - 1] ? sum[r - 1] / static_cast<double>(count[r - 1]) : 1.0;
  }
  return out;
}

}  // namespace spgrow

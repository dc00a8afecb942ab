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

#include "spgrow/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "spgrow/io.hpp"
#include "spgrow/parallel.hpp"

namespace spgrow {

LabelHistogram::LabelHistogram(std::vector<std::pair<std::int32_t, std::int32_t>> bins)
    : bins_(std::move(bins)) {
  std::sort(bins_.begin(), bins_.end());
  double sq = 0.0;
  for (const auto& [label, count] : bins_) {
    ensure(label > 0 && count > 0, "histogram bins must have positive label and count");
    sq += static_cast<double>(count) * static_cast<double>(count);
  }
  norm_ = std::sqrt(sq);
}

std::int32_t LabelHistogram::count(std::int32_t label) const {
  auto it = std::lower_bound(bins_.begin(), bins_.end(), std::pair{label, 0});
  return it != bins_.end() && it->first == label ? it->second : 0;
}

LabelHistogram compute_histogram(std::span<const Index> superpoint,
                                 const Projection& projection, const MaskImage& masks) {
  std::vector<std::int32_t> hits;
  for (Index p : superpoint) {
    if (!projection.visible[static_cast<std::size_t>(p)]) continue;
    const auto c = static_cast<Eigen::Index>(std::floor(projection.pixel(0, p)));
    const auto r = static_cast<Eigen::Index>(std::floor(projection.pixel(1, p)));
    const std::int32_t label = masks.labels(r, c);
    if (label > 0) hits.push_back(label);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::pair<std::int32_t, std::int32_t>> bins;
  for (std::size_t k = 0; k < hits.size();) {
    std::size_t e = k;
    while (e < hits.size() && hits[e] == hits[k]) ++e;
    bins.emplace_back(hits[k], static_cast<std::int32_t>(e - k));
    k = e;
  }
  return LabelHistogram(std::move(bins));
}

std::optional<double> single_view_affinity(const LabelHistogram& a, const LabelHistogram& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  double dot = 0.0;
  auto ia = a.bins().begin(), ib = b.bins().begin();
  while (ia != a.bins().end() && ib != b.bins().end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += static_cast<double>(ia->second) * static_cast<double>(ib->second);
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot / (a.norm() * b.norm()), 0.0, 1.0);
}

AggregatedAffinity aggregate_affinity(std::span<const ViewEvidence> views, double w_min) {
  double sum = 0.0, total = 0.0;
  for (const auto& v : views) {
    if (!v.affinity || v.visibility_i <= 0 || v.visibility_j <= 0) continue;
    const double w = v.visibility_i * v.visibility_j;
    sum += w * *v.affinity;
    total += w;
  }
  AggregatedAffinity out;
  out.weight_total = total;
  if (total > 0 && total >= w_min) out.affinity = std::clamp(sum / total, 0.0, 1.0);
  return out;
}

std::vector<NodePair> pairs_within_two_hops(const AdjacencyGraph& graph) {
  std::vector<NodePair> pairs;
  std::vector<std::uint8_t> dist(static_cast<std::size_t>(graph.size()), 0);
  std::vector<Index> touched;
  for (Index i = 0; i < graph.size(); ++i) {
    touched.clear();
    for (Index k : graph.neighbors(i)) {
      dist[k] = 1;
      touched.push_back(k);
    }
    for (Index k : graph.neighbors(i)) {
      for (Index j : graph.neighbors(k)) {
        if (j == i || dist[j] != 0) continue;
        dist[j] = 2;
        touched.push_back(j);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      if (j > i) pairs.push_back({i, j, dist[j]});
      dist[j] = 0;
    }
  }
  return pairs;
}

AffinityMatrix::AffinityMatrix(Index num_nodes, std::vector<Entry> entries)
    : num_nodes_(num_nodes), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.i < b.i || (a.i == b.i && a.j < b.j);
  });
  rows_.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
  for (const auto& e : entries_) {
    ensure(e.i >= 0 && e.i < e.j && e.j < num_nodes_, "affinity entry out of range");
    ++rows_[static_cast<std::size_t>(e.i) + 1];
  }
  for (std::size_t r = 1; r < rows_.size(); ++r) rows_[r] += rows_[r - 1];
  for (std::size_t k = 1; k < entries_.size(); ++k) {
    ensure(entries_[k - 1].i != entries_[k].i || entries_[k - 1].j != entries_[k].j,
           "duplicate affinity entry");
  }
}

const AffinityMatrix::Entry* AffinityMatrix::find(Index i, Index j) const {
  if (i == j || i < 0 || j < 0 || i >= num_nodes_ || j >= num_nodes_) return nullptr;
  if (j < i) std::swap(i, j);
  const auto begin = entries_.begin() + static_cast<std::ptrdiff_t>(rows_[i]);
  const auto end = entries_.begin() + static_cast<std::ptrdiff_t>(rows_[i + 1]);
  auto it = std::lower_bound(begin, end, j, [](const Entry& e, Index v) { return e.j < v; });
  return it != end && it->j == j ? &*it : nullptr;
}

std::optional<double> AffinityMatrix::affinity(Index i, Index j) const {
  const Entry* e = find(i, j);
  return e ? e->value : std::nullopt;
}

void AffinityMatrix::finalize(double w_min) {
  for (auto& e : entries_) {
    e.value.reset();
    if (e.weight_total > 0 && e.weight_total >= w_min) {
      e.value = std::clamp(e.weighted_sum / e.weight_total, 0.0, 1.0);
    }
  }
}

void AffinityMatrix::validate() const {
  for (const auto& e : entries_) {
    ensure(e.weight_total >= 0, "negative affinity weight");
    if (e.value) ensure(*e.value >= 0 && *e.value <= 1, "affinity outside [0, 1]");
  }
}

AffinityMatrix build_affinity_matrix(const PointCloud& cloud,
                                     const SuperpointPartition& partition,
                                     const AdjacencyGraph& adjacency,
                                     std::span<const CameraView> views,
                                     const AffinityOptions& options,
                                     std::vector<std::string>* empty_frames) {
  require(partition.num_points() == cloud.size(), "partition does not match the cloud");
  require(adjacency.size() == partition.num_superpoints(),
          "adjacency does not match the partition");
  const Index nq = partition.num_superpoints();
  const std::size_t nv = views.size();

  // Per view: visibility and histogram of every superpoint.
  std::vector<std::vector<double>> vis(nv);
  std::vector<std::vector<LabelHistogram>> hist(nv);
  parallel_for(nv, [&](std::size_t m) {
    const auto& view = views[m];
    require(view.masks.labels.rows() == view.height() && view.masks.labels.cols() == view.width(),
            "frame " + view.frame_id + ": mask size does not match the image");
    const Projection proj = project_points(cloud, view, options.depth_tolerance);
    vis[m].assign(static_cast<std::size_t>(nq), 0.0);
    hist[m].resize(static_cast<std::size_t>(nq));
    for (Index k = 0; k < nq; ++k) {
      const auto& members = partition.members[k];
      const double v = primitive_visibility(members, proj);
      vis[m][k] = v;
      if (v > 0) hist[m][k] = compute_histogram(members, proj, view.masks);
    }
  });
  if (empty_frames) {
    empty_frames->clear();
    for (std::size_t m = 0; m < nv; ++m) {
      if (std::all_of(vis[m].begin(), vis[m].end(), [](double v) { return v == 0; }))
        empty_frames->push_back(views[m].frame_id);
    }
  }

  const auto pairs = pairs_within_two_hops(adjacency);
  std::vector<AffinityMatrix::Entry> entries(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [i, j, d] = pairs[p];
    (void)d;
    auto& e = entries[p];
    e.i = i;
    e.j = j;
    for (std::size_t m = 0; m < nv; ++m) {
      const double vi = vis[m][i], vj = vis[m][j];
      if (vi <= 0 || vj <= 0) continue;
      const auto a = single_view_affinity(hist[m][i], hist[m][j]);
      if (!a) continue;
      const double w = vi * vj;
      e.weighted_sum += w * *a;
      e.weight_total += w;
    }
  });
  AffinityMatrix matrix(nq, std::move(entries));
  matrix.finalize(options.w_min);
  return matrix;
}

void save_affinity(const std::string& path, const AffinityMatrix& matrix) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write '" + path + "'");
  out << "spgrow-affinity 1 " << matrix.num_nodes() << ' ' << matrix.entries().size() << '\n';
  out << std::setprecision(17);
  for (const auto& e : matrix.entries()) {
    out << e.i << ' ' << e.j << ' ';
    if (e.value) out << *e.value;
    else out << "none";
    out << ' ' << e.weight_total << '\n';
  }
  require(static_cast<bool>(out), "failed writing '" + path + "'");
}

AffinityMatrix load_affinity(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string magic;
  int version = 0;
  Index nodes = 0;
  std::size_t count = 0;
  in >> magic >> version >> nodes >> count;
  require(!in.fail() && magic == "spgrow-affinity" && version == 1,
          path + ": not an affinity dump");
  std::vector<AffinityMatrix::Entry> entries(count);
  for (auto& e : entries) {
    std::string value;
    in >> e.i >> e.j >> value >> e.weight_total;
    require(!in.fail(), path + ": truncated affinity dump");
    if (value != "none") {
      e.value = std::stod(value);
      e.weighted_sum = *e.value * e.weight_total;
    }
  }
  AffinityMatrix m(nodes, std::move(entries));
  m.validate();
  return m;
}

}  // namespace spgrow

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

#include "spgrow/knn.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace spgrow {

namespace {
constexpr Index kLeafSize = 12;

struct Candidate {
  double dist2;
  Index index;
  bool operator<(const Candidate& o) const {
    return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index);
  }
};
}  // namespace

KdTree::KdTree(Eigen::Matrix3Xd points) : points_(std::move(points)) {
  order_.resize(static_cast<std::size_t>(points_.cols()));
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * order_.size() / kLeafSize + 2);
  if (!order_.empty()) build(0, size(), 0);
}

Index KdTree::build(Index begin, Index end, int depth) {
  const Index id = static_cast<Index>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, -1, 0.0});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (Index i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.col(order_[i]));
    hi = hi.cwiseMax(points_.col(order_[i]));
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  (void)depth;
  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) {
                     const double pa = points_(axis, a), pb = points_(axis, b);
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_(axis, order_[mid]);
  const Index left = build(begin, mid, depth + 1);
  const Index right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Index> KdTree::knn(const Eigen::Vector3d& q, int k, Index exclude) const {
  std::priority_queue<Candidate> best;  // max-heap on (dist, index)
  if (k <= 0 || nodes_.empty()) return {};
  const auto ku = static_cast<std::size_t>(k);

  auto visit = [&](auto&& self, Index node_id) -> void {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const Index p = order_[i];
        if (p == exclude) continue;
        const Candidate c{(points_.col(p) - q).squaredNorm(), p};
        if (best.size() < ku) {
          best.push(c);
        } else if (c < best.top()) {
          best.pop();
          best.push(c);
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const Index near = diff < 0 ? node.left : node.right;
    const Index far = diff < 0 ? node.right : node.left;
    self(self, near);
    if (best.size() < ku || diff * diff <= best.top().dist2) self(self, far);
  };
  visit(visit, 0);

  std::vector<Index> out(best.size());
  for (std::size_t i = best.size(); i-- > 0;) {
    out[i] = best.top().index;
    best.pop();
  }
  return out;
}

std::optional<Index> KdTree::nearest(const Eigen::Vector3d& q, double max_radius) const {
  const auto hit = knn(q, 1);
  if (hit.empty()) return std::nullopt;
  if ((points_.col(hit.front()) - q).norm() > max_radius) return std::nullopt;
  return hit.front();
}

}  // namespace spgrow
